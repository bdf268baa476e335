#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <json.hpp>

namespace sgf {

/// A JSON request/response service: rephraser, captioner, scorer or
/// summarizer. Implementations throw ClientError on transport or protocol
/// failure and must be callable from several threads at once.
class TextClient {
 public:
  virtual ~TextClient() = default;
  virtual nlohmann::json call(const nlohmann::json& request) const = 0;
};

/// POSTs the request as JSON to a single http:// endpoint.
class HttpClient final : public TextClient {
 public:
  /// `url` is http://host[:port][/path]. Throws ConfigError when malformed.
  explicit HttpClient(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  nlohmann::json call(const nlohmann::json& request) const override;

  const std::string& url() const { return url_; }

 private:
  std::string url_;
  std::string origin_;  // scheme://host:port
  std::string path_;
  std::chrono::milliseconds timeout_;
};

/// Offline rephraser. Replies to {"kind","prompt","text"} with {"text"}.
class StubRephraser final : public TextClient {
 public:
  enum class Mode {
    kIdentity,      // echo the text
    kPrefix,        // "In this room, " + text with a lowercased first letter
    kDropTarget,    // replace the text with a sentence that names no object
    kTwoSentences,  // text followed by an extra sentence
    kFail,          // throw ClientError
  };

  explicit StubRephraser(Mode mode = Mode::kPrefix) : mode_(mode) {}
  nlohmann::json call(const nlohmann::json& request) const override;

  /// Throws ConfigError for unknown names.
  static Mode mode_from_string(const std::string& name);

 private:
  Mode mode_;
};

/// Offline captioner. Replies to {"task":"caption","object_label",...} with
/// {"text"} built from the label and view.
class StubCaptioner final : public TextClient {
 public:
  nlohmann::json call(const nlohmann::json& request) const override;
};

/// Offline image-text scorer. Replies with {"score"} in [0, 1] derived from a
/// hash of the request, so scores are reproducible but vary across views.
class StubScorer final : public TextClient {
 public:
  nlohmann::json call(const nlohmann::json& request) const override;
};

/// Offline summarizer. Joins the distinct candidate texts of
/// {"texts": [...]} into one description.
class StubSummarizer final : public TextClient {
 public:
  nlohmann::json call(const nlohmann::json& request) const override;
};

/// Reads a string field from a client response; throws ClientError when absent.
std::string response_text(const nlohmann::json& response, const char* field = "text");

}  // namespace sgf
