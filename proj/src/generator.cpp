#include "adforge/generator.hpp"

#include <cctype>
#include <random>
#include <sstream>

namespace adforge::gen {

namespace {

bool is_placeholder_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Scans {identifier} placeholders. Any other use of braces in a template body
// is rejected up front rather than silently passed through.
std::set<std::string> scan_placeholders(const std::string& body, const std::string& name) {
  std::set<std::string> found;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '}') {
      throw SchemaError("template \"" + name + "\": unmatched '}'");
    }
    if (body[i] != '{') continue;
    const auto close = body.find('}', i + 1);
    if (close == std::string::npos) {
      throw SchemaError("template \"" + name + "\": unmatched '{'");
    }
    const auto placeholder = body.substr(i + 1, close - i - 1);
    if (placeholder.empty() ||
        !std::all_of(placeholder.begin(), placeholder.end(), is_placeholder_char)) {
      throw SchemaError("template \"" + name + "\": malformed placeholder {" + placeholder + "}");
    }
    found.insert(placeholder);
    i = close;
  }
  return found;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string body)
    : name_(std::move(name)), body_(std::move(body)) {
  required_ = scan_placeholders(body_, name_);
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
  std::string out;
  out.reserve(body_.size());
  for (std::size_t i = 0; i < body_.size(); ++i) {
    if (body_[i] != '{') {
      out.push_back(body_[i]);
      continue;
    }
    const auto close = body_.find('}', i + 1);
    const auto placeholder = body_.substr(i + 1, close - i - 1);
    const auto bound = bindings.find(placeholder);
    if (bound == bindings.end()) {
      throw UnboundPlaceholder("template \"" + name_ + "\": no binding for {" + placeholder + "}");
    }
    out.append(bound->second);
    i = close;
  }
  return out;
}

std::string build_qa_prompt(const corpus::QueryTask& task, int top_k) {
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  if (task.passages.empty()) {
    throw EmptyPassages("task " + task.id + " has no passages");
  }
  std::string context;
  const auto used = std::min<std::size_t>(task.passages.size(), static_cast<std::size_t>(top_k));
  for (std::size_t i = 0; i < used; ++i) {
    if (i > 0) context += "\n\n";
    context += task.passages[i].text;
  }
  return prompts::qa_template().render({{"context", context}, {"query", task.query}});
}

std::string build_rewrite_prompt(const std::string& query, const std::string& response,
                                 const corpus::AdItem& item) {
  auto require = [](const std::string& value, const char* field) {
    if (value.empty()) throw MissingField(std::string("rewrite prompt: empty ") + field);
  };
  require(query, "query");
  require(response, "response");
  require(item.item, "item");
  require(item.type, "type");
  require(item.qualities, "qualities");
  return prompts::rewrite_template().render({{"type", item.type},
                                             {"item", item.item},
                                             {"qualities", item.qualities},
                                             {"query", query},
                                             {"response", response}});
}

namespace {

// Fixed stub vocabulary. The first eight words carry promotional flavor so a
// classifier trained on matching fixtures spreads real score mass across stub
// candidates.
const std::vector<std::string>& stub_words() {
  static const std::vector<std::string> words = {
      "premium", "exclusive", "bargain", "deal",    "offer",   "luxury",  "trusted", "upgrade",
      "river",   "stone",     "window",  "garden",  "quiet",   "autumn",  "pencil",  "journey",
      "candle",  "meadow",    "harbor",  "violet",  "thunder", "biscuit", "lantern", "orchard"};
  return words;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// The line the stub echoes back: the first line carrying a known query
// marker, else the first non-empty line.
std::string subject_line(const std::string& prompt) {
  static const std::vector<std::string> markers = {"Search Query:", "Original query:", "Query:"};
  std::string fallback;
  std::istringstream lines(prompt);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (const auto& marker : markers) {
      if (line.rfind(marker, 0) == 0) {
        auto payload = line.substr(marker.size());
        const auto start = payload.find_first_not_of(' ');
        return start == std::string::npos ? std::string() : payload.substr(start);
      }
    }
    if (fallback.empty() && !line.empty()) fallback = line;
  }
  return fallback;
}

std::string draw_words(std::mt19937_64& rng, int count) {
  const auto& words = stub_words();
  std::string out;
  for (int i = 0; i < count; ++i) {
    if (i > 0) out.push_back(' ');
    out += words[rng() % words.size()];
  }
  return out;
}

}  // namespace

std::vector<Candidate> stub_generate(const GenerationRequest& request) {
  if (!request.seed.has_value()) {
    throw MissingSeed("stub generation requires an explicit seed");
  }
  if (request.n < 1) throw std::invalid_argument("n must be >= 1");

  const auto base = fnv1a(request.prompt) ^ (*request.seed * 0x9e3779b97f4a7c15ULL);
  const auto subject = subject_line(request.prompt);
  const bool structured = request.prompt.find("Reply in exactly this format:") != std::string::npos;

  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(request.n));
  for (int index = 0; index < request.n; ++index) {
    auto stream = base;
    if (request.temperature > 0.0) {
      stream ^= (static_cast<std::uint64_t>(index) + 1) * 0xbf58476d1ce4e5b9ULL;
    }
    std::mt19937_64 rng(stream);
    std::string text;
    if (structured) {
      text = "Summary: " + subject + " " + draw_words(rng, 12) + "\nKey Features:\n";
      const int features = 3 + static_cast<int>(rng() % 3);
      for (int f = 0; f < features; ++f) {
        text += "- " + draw_words(rng, 2) + "\n";
      }
    } else {
      const int suffix_len = 6 + static_cast<int>(rng() % 5);
      text = subject.empty() ? draw_words(rng, suffix_len)
                             : subject + " " + draw_words(rng, suffix_len);
    }
    candidates.push_back({index, std::move(text), "stop", false});
  }
  return candidates;
}

}  // namespace adforge::gen
