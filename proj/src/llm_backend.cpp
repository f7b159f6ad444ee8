#include "got/llm_backend.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "got/error.hpp"
#include "got/rng.hpp"

namespace got {

CompletionRequest CompletionRequest::user(std::string text) {
  CompletionRequest r;
  r.messages.push_back({"user", std::move(text)});
  return r;
}

std::string CompletionRequest::prompt() const {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i) out += "\n";
    out += messages[i].text;
  }
  return out;
}

void CompletionRequest::check() const {
  if (n < 1) throw InvalidParameters("request n must be at least 1");
  if (temperature < 0) throw InvalidParameters("temperature must be non-negative");
  if (messages.empty()) throw InvalidParameters("request has no messages");
}

std::int64_t count_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

CompletionResponse LlmBackend::query(const CompletionRequest& request) {
  request.check();
  calls_.fetch_add(1);
  auto resp = do_query(request);
  if (resp.texts.size() < static_cast<std::size_t>(request.n)) {
    throw ContractViolation(name() + " returned " + std::to_string(resp.texts.size()) + " texts, expected " +
                            std::to_string(request.n));
  }
  resp.texts.resize(static_cast<std::size_t>(request.n));
  return resp;
}

void CostLedger::add(const LedgerEntry& e) {
  entries_.push_back(e);
  prompt_tokens_ += e.prompt_tokens;
  response_tokens_ += e.response_tokens;
}

rational entry_cost(const LedgerEntry& e, const CostModel& model) {
  return (rational(e.prompt_tokens) * model.prompt_per_1k + rational(e.response_tokens) * model.response_per_1k) /
         1000;
}

rational total_cost(const CostLedger& ledger, const CostModel& model) {
  rational sum = 0;
  for (const auto& e : ledger.entries()) sum += entry_cost(e, model);
  return sum;
}

rational parse_decimal(std::string_view text) {
  using boost::multiprecision::cpp_int;
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  auto digits = [](std::string_view s) {
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
  };
  if ((whole.empty() && frac.empty()) || !digits(whole) || !digits(frac)) {
    throw ConfigError("not a non-negative decimal: '" + std::string(text) + "'");
  }
  // cpp_int reads a leading zero as an octal prefix.
  std::string joined = std::string(whole) + std::string(frac);
  joined.erase(0, std::min(joined.find_first_not_of('0'), joined.size() - 1));
  cpp_int num(joined);
  cpp_int den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  return rational(num, den);
}

std::string format_rational(const rational& r) {
  auto num = boost::multiprecision::numerator(r);
  auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

rational parse_rational(std::string_view text) {
  using boost::multiprecision::cpp_int;
  auto integer = [text](std::string_view s) {
    bool neg = !s.empty() && s[0] == '-';
    if (neg) s.remove_prefix(1);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) {
      throw ParseFailure("not a rational: '" + std::string(text) + "'");
    }
    s.remove_prefix(std::min(s.find_first_not_of('0'), s.size() - 1));
    cpp_int v(std::string{s});
    return neg ? cpp_int(-v) : v;
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return rational(integer(text));
  cpp_int den = integer(text.substr(slash + 1));
  if (den == 0) throw ParseFailure("zero denominator in '" + std::string(text) + "'");
  return rational(integer(text.substr(0, slash)), den);
}

double to_double(const rational& r) { return r.convert_to<double>(); }

ScriptedBackend::ScriptedBackend(std::vector<Rule> rules, std::vector<std::string> fallback)
    : rules_(std::move(rules)), cursors_(rules_.size(), 0), fallback_(std::move(fallback)) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("scripted fixture is not a JSON object");
  std::vector<Rule> rules;
  try {
    for (const auto& r : j.value("rules", nlohmann::json::array())) {
      Rule rule;
      rule.digest = r.value("digest", "");
      rule.contains = r.value("contains", "");
      rule.responses = r.at("responses").get<std::vector<std::string>>();
      if (rule.responses.empty()) throw ConfigError("scripted rule without responses");
      rules.push_back(std::move(rule));
    }
    auto fallback = j.value("default", std::vector<std::string>{});
    return std::make_unique<ScriptedBackend>(std::move(rules), std::move(fallback));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scripted fixture: ") + e.what());
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scripted fixture '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

CompletionResponse ScriptedBackend::do_query(const CompletionRequest& request) {
  std::string prompt = request.prompt();
  std::string digest = hex64(fnv1a(prompt));
  std::lock_guard<std::mutex> lock(mu_);
  CompletionResponse resp;
  resp.prompt_tokens = count_tokens(prompt);
  auto take = [&](const std::vector<std::string>& pool, std::size_t& cursor) {
    for (int i = 0; i < request.n; ++i) {
      resp.texts.push_back(pool[cursor % pool.size()]);
      ++cursor;
    }
  };
  bool matched = false;
  for (std::size_t i = 0; i < rules_.size() && !matched; ++i) {
    const auto& r = rules_[i];
    bool hit = (!r.digest.empty() && r.digest == digest) ||
               (!r.contains.empty() && prompt.find(r.contains) != std::string::npos);
    if (hit) {
      take(r.responses, cursors_[i]);
      matched = true;
    }
  }
  if (!matched) {
    if (fallback_.empty()) throw BackendFailure("scripted backend has no response for prompt " + digest);
    take(fallback_, fallback_cursor_);
  }
  for (const auto& t : resp.texts) resp.response_tokens += count_tokens(t);
  return resp;
}

}  // namespace got
