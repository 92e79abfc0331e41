#pragma once

#include "hermit/channel.hpp"
#include "hermit/montecarlo.hpp"
#include "hermit/transform.hpp"

#include <json.hpp>

namespace hermit {

/// {"B","U","H_re","H_im","hJ_re","hJ_im","Es","Ej","N0"}, H row-major with
/// one row per antenna.
nlohmann::json channel_to_json(const ChannelRealization& ch);
ChannelRealization channel_from_json(const nlohmann::json& j);

/// {"cluster_size", "alphabet": {"kind", "cardinality"}, "blocks": [{"beta": [re, im],
/// "b_re", "b_im", "a_re", "a_im"}]}
nlohmann::json transform_to_json(const AnalogTransform<double>& T);
AnalogTransform<double> transform_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Applies the keys present in `j` on top of `base`; unknown keys and wrong
/// types throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

std::string alphabet_kind_name(AlphabetKind kind);  // "uq", "pq", "qq"
AlphabetKind parse_alphabet_kind(std::string_view name);
std::string propagation_name(Propagation p);  // "los", "nlos"
Propagation parse_propagation(std::string_view name);

}  // namespace hermit
