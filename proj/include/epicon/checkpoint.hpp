#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "epicon/errors.hpp"
#include "epicon/net.hpp"

namespace epicon {

// Networks serialize to JSON with their full architecture and the flat
// parameter vector.  The JSON writer emits shortest-round-trip doubles, so a
// load restores every parameter bit for bit.

inline nlohmann::json net_to_json(const FeedForward& net) {
  std::vector<std::string> acts;
  for (Activation a : net.activations()) acts.push_back(activation_name(a));
  std::vector<double> params(net.params().data(),
                             net.params().data() + net.n_params());
  return {{"widths", net.widths()},
          {"activations", acts},
          {"params", params}};
}

inline FeedForward net_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("widths") || !j.contains("activations") ||
      !j.contains("params")) {
    throw ConfigError("network document needs widths, activations and params");
  }
  std::vector<int> widths = j.at("widths").get<std::vector<int>>();
  std::vector<Activation> acts;
  for (const auto& name : j.at("activations")) {
    acts.push_back(activation_from_name(name.get<std::string>()));
  }
  FeedForward net(widths, acts);
  std::vector<double> params = j.at("params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(params.size()) != net.n_params()) {
    throw ConfigError("network document has wrong parameter count");
  }
  for (Eigen::Index i = 0; i < net.n_params(); ++i) net.params()[i] = params[i];
  return net;
}

inline nlohmann::json actor_to_json(const EncoderActor& actor) {
  return {{"n_regions", actor.n_regions()},
          {"slice_dim", actor.slice_dim()},
          {"encoder", net_to_json(actor.encoder())},
          {"head", net_to_json(actor.head())}};
}

inline EncoderActor actor_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n_regions") || !j.contains("slice_dim") ||
      !j.contains("encoder") || !j.contains("head")) {
    throw ConfigError("actor document needs n_regions, slice_dim, encoder and head");
  }
  FeedForward encoder = net_from_json(j.at("encoder"));
  FeedForward head = net_from_json(j.at("head"));
  int n_regions = j.at("n_regions").get<int>();
  int slice_dim = j.at("slice_dim").get<int>();
  if (encoder.input_dim() != slice_dim) {
    throw ConfigError("actor encoder input does not match slice_dim");
  }
  if (head.input_dim() != 2 * encoder.output_dim()) {
    throw ConfigError("actor head input does not match encoder output");
  }
  if (encoder.n_layers() != 1 || head.n_layers() != 2) {
    throw ConfigError("actor document has unexpected layer structure");
  }
  EncoderActor actor(n_regions, slice_dim, encoder.output_dim(),
                     head.widths()[1], head.output_dim());
  actor.encoder().params() = encoder.params();
  actor.head().params() = head.params();
  return actor;
}

}  // namespace epicon
