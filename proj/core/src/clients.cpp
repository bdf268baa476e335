#include "sgf/clients.hpp"

#include <cctype>
#include <regex>
#include <set>

#include <httplib.h>

#include "sgf/error.hpp"
#include "sgf/seed.hpp"

namespace sgf {

using json = nlohmann::json;

std::string response_text(const json& response, const char* field) {
  if (!response.is_object() || !response.contains(field) || !response[field].is_string()) {
    throw ClientError(std::string("client response lacks a string '") + field + "' field");
  }
  return response[field].get<std::string>();
}

HttpClient::HttpClient(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {
  static const std::regex kUrl(R"(^(http://[A-Za-z0-9._\-]+(:[0-9]+)?)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url_, m, kUrl)) throw ConfigError("client url '" + url_ + "' is not an http:// URL");
  origin_ = m[1].str();
  path_ = m[3].matched ? m[3].str() : "/";
  if (timeout_.count() <= 0) throw ConfigError("client timeout must be > 0");
}

json HttpClient::call(const json& request) const {
  httplib::Client cli(origin_);
  const auto secs = timeout_.count() / 1000;
  const auto usecs = (timeout_.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  const auto res = cli.Post(path_, request.dump(), "application/json");
  if (!res) throw ClientError("POST " + url_ + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ClientError("POST " + url_ + " returned HTTP " + std::to_string(res->status));
  try {
    return json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ClientError("POST " + url_ + " returned a non-JSON body");
  }
}

StubRephraser::Mode StubRephraser::mode_from_string(const std::string& name) {
  if (name == "identity") return Mode::kIdentity;
  if (name == "prefix") return Mode::kPrefix;
  if (name == "drop-target") return Mode::kDropTarget;
  if (name == "two-sentences") return Mode::kTwoSentences;
  if (name == "fail") return Mode::kFail;
  throw ConfigError("unknown stub rephraser mode '" + name + "'");
}

json StubRephraser::call(const json& request) const {
  std::string text = request.value("text", std::string{});
  switch (mode_) {
    case Mode::kIdentity:
      break;
    case Mode::kPrefix:
      if (!text.empty() && !(text.size() > 1 && std::isupper(static_cast<unsigned char>(text[1])))) {
        text.front() = static_cast<char>(std::tolower(static_cast<unsigned char>(text.front())));
      }
      text = "In this room, " + text;
      break;
    case Mode::kDropTarget:
      text = "Something is somewhere in the room.";
      break;
    case Mode::kTwoSentences:
      text += " It is easy to spot.";
      break;
    case Mode::kFail:
      throw ClientError("stub rephraser configured to fail");
  }
  return json{{"text", text}};
}

json StubCaptioner::call(const json& request) const {
  static const char* kForms[] = {"A {} in a room.", "A close view of a {}.", "A {} next to other furniture.",
                                 "A {} seen from the side."};
  const std::string label = request.value("object_label", std::string("object"));
  const std::uint64_t h = fnv1a64(request.dump());
  std::string form = kForms[h % 4];
  form.replace(form.find("{}"), 2, label);
  return json{{"text", form}};
}

json StubScorer::call(const json& request) const {
  const std::uint64_t h = fnv1a64(request.dump());
  return json{{"score", static_cast<double>(h % 1001) / 1000.0}};
}

json StubSummarizer::call(const json& request) const {
  if (!request.contains("texts") || !request["texts"].is_array()) {
    throw ClientError("summarizer request lacks 'texts'");
  }
  std::set<std::string> seen;
  std::string out;
  for (const auto& t : request["texts"]) {
    const std::string s = t.get<std::string>();
    if (!seen.insert(s).second) continue;
    if (!out.empty()) out += ' ';
    out += s;
  }
  return json{{"text", out}};
}

}  // namespace sgf
