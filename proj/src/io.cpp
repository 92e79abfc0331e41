#include "hermit/io.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace hermit {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

json vector_part(const Eigen::VectorXcd& v, bool imag) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(imag ? v(i).imag() : v(i).real());
  return arr;
}

Eigen::VectorXcd vector_from(const json& re, const json& im) {
  if (!re.is_array() || !im.is_array() || re.size() != im.size())
    throw ConfigError("complex vector needs real and imaginary arrays of equal length");
  Eigen::VectorXcd v(static_cast<Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Index>(i)) = {re[i].get<double>(), im[i].get<double>()};
  return v;
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

json channel_to_json(const ChannelRealization& ch) {
  json H_re = json::array(), H_im = json::array();
  for (Index b = 0; b < ch.H.rows(); ++b) {
    H_re.push_back(vector_part(ch.H.row(b).transpose(), false));
    H_im.push_back(vector_part(ch.H.row(b).transpose(), true));
  }
  return {{"B", ch.num_antennas()}, {"U", ch.num_users()}, {"H_re", H_re},
          {"H_im", H_im},           {"hJ_re", vector_part(ch.hJ, false)},
          {"hJ_im", vector_part(ch.hJ, true)}, {"Es", ch.Es}, {"Ej", ch.Ej}, {"N0", ch.N0}};
}

ChannelRealization channel_from_json(const json& j) {
  try {
    const auto B = j.at("B").get<Index>();
    const auto U = j.at("U").get<Index>();
    const auto& H_re = j.at("H_re");
    const auto& H_im = j.at("H_im");
    if (!H_re.is_array() || !H_im.is_array() || static_cast<Index>(H_re.size()) != B ||
        static_cast<Index>(H_im.size()) != B)
      throw ConfigError("channel JSON: H must have B rows");
    ChannelRealization ch;
    ch.H.resize(B, U);
    for (Index b = 0; b < B; ++b) {
      const auto row = vector_from(H_re[static_cast<std::size_t>(b)], H_im[static_cast<std::size_t>(b)]);
      if (row.size() != U) throw ConfigError("channel JSON: H rows must have U entries");
      ch.H.row(b) = row.transpose();
    }
    ch.hJ = vector_from(j.at("hJ_re"), j.at("hJ_im"));
    if (ch.hJ.size() != B) throw ConfigError("channel JSON: hJ must have B entries");
    ch.Es = j.at("Es").get<double>();
    ch.Ej = j.at("Ej").get<double>();
    ch.N0 = j.at("N0").get<double>();
    return ch;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("channel JSON: ") + e.what());
  }
}

json transform_to_json(const AnalogTransform<double>& T) {
  json blocks = json::array();
  for (const auto& blk : T.blocks) {
    blocks.push_back({{"beta", {blk.beta.real(), blk.beta.imag()}},
                      {"b_re", vector_part(blk.b, false)},
                      {"b_im", vector_part(blk.b, true)},
                      {"a_re", vector_part(blk.a, false)},
                      {"a_im", vector_part(blk.a, true)}});
  }
  return {{"cluster_size", T.cluster_size},
          {"alphabet", {{"kind", alphabet_kind_name(T.alphabet.kind)}, {"cardinality", T.alphabet.cardinality}}},
          {"blocks", blocks}};
}

AnalogTransform<double> transform_from_json(const json& j) {
  try {
    AnalogTransform<double> T;
    T.cluster_size = j.at("cluster_size").get<Index>();
    T.alphabet.kind = parse_alphabet_kind(j.at("alphabet").at("kind").get<std::string>());
    T.alphabet.cardinality = j.at("alphabet").at("cardinality").get<int>();
    T.alphabet.validate();
    for (const auto& bj : j.at("blocks")) {
      TransformBlock<double> blk;
      blk.beta = {bj.at("beta").at(0).get<double>(), bj.at("beta").at(1).get<double>()};
      blk.b = vector_from(bj.at("b_re"), bj.at("b_im"));
      blk.a = vector_from(bj.at("a_re"), bj.at("a_im"));
      if (blk.b.size() != T.cluster_size || blk.a.size() != T.cluster_size)
        throw ConfigError("transform JSON: block vectors must have cluster_size entries");
      T.blocks.push_back(std::move(blk));
    }
    return T;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("transform JSON: ") + e.what());
  }
}

std::string alphabet_kind_name(AlphabetKind kind) {
  switch (kind) {
    case AlphabetKind::Phase:
      return "pq";
    case AlphabetKind::Quadrature:
      return "qq";
    case AlphabetKind::Unconstrained:
      break;
  }
  return "uq";
}

AlphabetKind parse_alphabet_kind(std::string_view name) {
  const auto key = lower(name);
  if (key == "uq") return AlphabetKind::Unconstrained;
  if (key == "pq") return AlphabetKind::Phase;
  if (key == "qq") return AlphabetKind::Quadrature;
  throw ConfigError("alphabet must be one of uq, pq, qq (got '" + std::string(name) + "')");
}

std::string propagation_name(Propagation p) { return p == Propagation::LoS ? "los" : "nlos"; }

Propagation parse_propagation(std::string_view name) {
  const auto key = lower(name);
  if (key == "los") return Propagation::LoS;
  if (key == "nlos") return Propagation::NLoS;
  throw ConfigError("propagation must be los or nlos (got '" + std::string(name) + "')");
}

json config_to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (const auto m : c.methods) methods.push_back(method_name(m));
  return {{"B", c.num_antennas},
          {"U", c.num_users},
          {"propagation", propagation_name(c.propagation)},
          {"nlos_paths", c.nlos.num_paths},
          {"nlos_spread_deg", c.nlos.angular_spread_deg},
          {"methods", methods},
          {"bits", c.bits},
          {"cluster_size", c.cluster_size},
          {"ac", c.ac},
          {"alphabet", alphabet_kind_name(c.alphabet)},
          {"rho_db", c.rho_db},
          {"snr_db", c.snr_db},
          {"trials_per_point", c.trials_per_point},
          {"channels_per_point", c.channels_per_point},
          {"seed", c.seed}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {"B",  "U",      "propagation", "nlos_paths",       "nlos_spread_deg",
                                              "methods", "bits", "cluster_size", "ac", "alphabet",
                                              "rho_db", "snr_db", "trials_per_point", "channels_per_point", "seed"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");

  if (j.contains("B")) c.num_antennas = get_as<Index>(j, "B");
  if (j.contains("U")) c.num_users = get_as<Index>(j, "U");
  if (j.contains("propagation")) c.propagation = parse_propagation(get_as<std::string>(j, "propagation"));
  if (j.contains("nlos_paths")) c.nlos.num_paths = get_as<int>(j, "nlos_paths");
  if (j.contains("nlos_spread_deg")) c.nlos.angular_spread_deg = get_as<double>(j, "nlos_spread_deg");
  if (j.contains("alphabet")) c.alphabet = parse_alphabet_kind(get_as<std::string>(j, "alphabet"));
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& name : get_as<std::vector<std::string>>(j, "methods")) {
      if (lower(name) == "hermit")
        c.methods.push_back(c.alphabet == AlphabetKind::Phase        ? Method::HermitPQ
                            : c.alphabet == AlphabetKind::Quadrature ? Method::HermitQQ
                                                                     : Method::HermitUQ);
      else
        c.methods.push_back(parse_method(name));
    }
  }
  if (j.contains("bits")) c.bits = get_as<int>(j, "bits");
  if (j.contains("cluster_size")) c.cluster_size = get_as<Index>(j, "cluster_size");
  if (j.contains("ac")) c.ac = get_as<int>(j, "ac");
  if (j.contains("rho_db")) c.rho_db = get_as<double>(j, "rho_db");
  if (j.contains("snr_db")) c.snr_db = get_as<std::vector<double>>(j, "snr_db");
  if (j.contains("trials_per_point")) c.trials_per_point = get_as<int>(j, "trials_per_point");
  if (j.contains("channels_per_point")) c.channels_per_point = get_as<int>(j, "channels_per_point");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  return c;
}

}  // namespace hermit
