#include "tcpsync/serialization.hpp"

#include <stdexcept>
#include <string>

namespace tcpsync {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const char* context) {
  if (!j.is_object()) throw std::invalid_argument(std::string(context) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument("unknown key '" + key + "' in " + context);
  }
}

nlohmann::json to_json(const ProtocolSpec& s) {
  nlohmann::json j{{"variant", std::string(to_string(s.variant))}};
  switch (s.variant) {
    case Variant::Compound:
      j["alpha"] = s.alpha;
      j["beta"] = s.beta;
      j["k"] = s.k;
      j["gamma"] = s.gamma;
      j["zeta"] = s.zeta;
      break;
    case Variant::Illinois:
      j["alpha_max"] = s.alpha_max;
      j["beta_min"] = s.beta_min;
      break;
    case Variant::Reno:
      break;
  }
  return j;
}

ProtocolSpec protocol_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    ProtocolSpec s;
    s.variant = parse_variant(j.get<std::string>());
    return s;
  }
  reject_unknown_keys(j, {"variant", "alpha", "beta", "k", "gamma", "zeta", "alpha_max", "beta_min"},
                      "protocol");
  ProtocolSpec s;
  s.variant = parse_variant(j.at("variant").get<std::string>());
  s.alpha = j.value("alpha", s.alpha);
  s.beta = j.value("beta", s.beta);
  s.k = j.value("k", s.k);
  s.gamma = j.value("gamma", s.gamma);
  s.zeta = j.value("zeta", s.zeta);
  s.alpha_max = j.value("alpha_max", s.alpha_max);
  s.beta_min = j.value("beta_min", s.beta_min);
  s.validate();
  return s;
}

nlohmann::json to_json(const NetworkParams& n) {
  return {{"c_prime", n.c_prime}, {"C_tilde", n.C_tilde}, {"tau", n.tau}, {"b", n.b},
          {"B", n.B},             {"n_e", n.n_e},         {"n_c", n.n_c}};
}

NetworkParams network_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"c_prime", "C_tilde", "tau", "b", "B", "n_e", "n_c"}, "network");
  NetworkParams n;
  n.c_prime = j.value("c_prime", n.c_prime);
  n.C_tilde = j.value("C_tilde", n.C_tilde);
  n.tau = j.value("tau", n.tau);
  n.b = j.value("b", n.b);
  n.B = j.value("B", n.B);
  n.n_e = j.value("n_e", n.n_e);
  n.n_c = j.value("n_c", n.n_c);
  n.validate();
  return n;
}

}  // namespace tcpsync
