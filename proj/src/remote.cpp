#include "bufferattack/victim.hpp"

#include "httplib.h"
#include "json.hpp"

namespace bufferattack {

using nlohmann::json;

namespace {

// Splits "http://host:port/prefix" into the client base and the path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos || endpoint.compare(0, scheme, "http") != 0)
    throw ConfigError("endpoint must start with http://: " + endpoint);
  const auto slash = endpoint.find('/', scheme + 3);
  std::string base = endpoint.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base, prefix};
}

}  // namespace

Prediction parse_remote_response(const std::string& body, int num_classes) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed response: ") + e.what());
  }
  if (!j.is_object() || !j.contains("label") || !j.contains("probs") ||
      !j["label"].is_number_integer() || !j["probs"].is_array())
    throw ProtocolError("malformed response: need integer \"label\" and array \"probs\"");
  const auto& probs = j["probs"];
  if (static_cast<int>(probs.size()) != num_classes)
    throw ProtocolError("response has " + std::to_string(probs.size()) + " classes, expected " +
                        std::to_string(num_classes));
  Eigen::VectorXd p(num_classes);
  for (int i = 0; i < num_classes; ++i) {
    if (!probs[i].is_number()) throw ProtocolError("malformed response: non-numeric probability");
    p(i) = probs[i].get<double>();
  }
  try {
    return Prediction::from_labeled(j["label"].get<int>(), std::move(p));
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string("invalid prediction: ") + e.what());
  }
}

RemoteClassifier::RemoteClassifier(RemoteModelConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.num_classes < 2) throw ConfigError("remote model needs num_classes >= 2");
  if (cfg_.timeout_ms <= 0) throw ConfigError("remote timeout must be positive");
  auto [base, prefix] = split_endpoint(cfg_.endpoint);
  path_ = prefix + "/predict";
  client_ = std::make_unique<httplib::Client>(base);
  const time_t sec = cfg_.timeout_ms / 1000;
  const time_t usec = static_cast<time_t>(cfg_.timeout_ms % 1000) * 1000;
  client_->set_connection_timeout(sec, usec);
  client_->set_read_timeout(sec, usec);
  client_->set_write_timeout(sec, usec);
}

RemoteClassifier::~RemoteClassifier() = default;

Prediction RemoteClassifier::predict_text(const std::string& text) const {
  const std::string body = json{{"text", text}}.dump();
  httplib::Result res;
  {
    std::lock_guard lock(mu_);
    res = client_->Post(path_, body, "application/json");
  }
  if (!res) throw ProtocolError("transport error: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProtocolError("HTTP status " + std::to_string(res->status));
  return parse_remote_response(res->body, cfg_.num_classes);
}

Prediction RemoteClassifier::predict(const Tokens& tokens) const {
  return predict_text(join_tokens(tokens));
}

Prediction remote_predict(const RemoteModelConfig& cfg, const std::string& text) {
  return RemoteClassifier(cfg).predict_text(text);
}

}  // namespace bufferattack
