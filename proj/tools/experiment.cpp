#include "experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "madrom/errors.hpp"
#include "madrom/persist/checkpoint.hpp"
#include "madrom/problems/burgers.hpp"
#include "madrom/problems/grf.hpp"
#include "madrom/problems/instance_spec.hpp"
#include "madrom/problems/laplace.hpp"
#include "madrom/problems/ode.hpp"

namespace madrom::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  // nlohmann converts numbers across kinds silently; insist on the right one.
  bool ok = true;
  if constexpr (std::is_same_v<T, bool>) {
    ok = v.is_boolean();
  } else if constexpr (std::is_integral_v<T>) {
    ok = v.is_number_integer();
  } else if constexpr (std::is_floating_point_v<T>) {
    ok = v.is_number();
  } else if constexpr (std::is_same_v<T, std::string>) {
    ok = v.is_string();
  }
  if (!ok) throw ConfigError(where + "." + key + ": wrong type");
  try {
    out = v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

Variant parse_variant(const std::string& s, const std::string& where) {
  if (s == "in-distribution") return Variant::kInDistribution;
  if (s == "heterogeneous-nu") return Variant::kHeterogeneousNu;
  if (s == "extrapolation-grf") return Variant::kExtrapolationGrf;
  if (s == "ellipse") return Variant::kEllipse;
  throw ConfigError(where + ": unknown variant '" + s + "'");
}

train::TrainConfig read_train(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return {};
  return persist::parse_train_config_json(j.at(key).dump(), where + "." + key);
}

net::NetworkConfig read_network(const json& j, problems::Family family) {
  net::NetworkConfig c;
  c.spatial_dim = family == problems::Family::kOde ? 1 : 2;
  bool periodic = family == problems::Family::kBurgers;
  if (j.contains("network")) {
    const json& n = j.at("network");
    const std::string where = "network";
    reject_unknown(n, {"depth", "width", "latent_dim", "first_layer_scale", "insert_latent_at", "periodic_x"}, where);
    read(n, "depth", c.depth, where);
    read(n, "width", c.width, where);
    read(n, "latent_dim", c.latent_dim, where);
    read(n, "first_layer_scale", c.first_layer_scale, where);
    if (n.contains("insert_latent_at") && !n.at("insert_latent_at").is_null()) {
      int at = 0;
      read(n, "insert_latent_at", at, where);
      c.insert_latent_at = at;
    }
    read(n, "periodic_x", periodic, where);
  }
  if (periodic) c.periodic_embedding = net::PeriodicEmbedding{0, 1.0};
  return c;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kInDistribution: return "in-distribution";
    case Variant::kHeterogeneousNu: return "heterogeneous-nu";
    case Variant::kExtrapolationGrf: return "extrapolation-grf";
    case Variant::kEllipse: return "ellipse";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  try {
    network.validate();
    pretrain.validate();
    finetune.validate();
    source.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  check(network.spatial_dim == (family == problems::Family::kOde ? 1 : 2), "network: wrong spatial dimension for family");
  check(threshold > 0.0, "threshold must be > 0");
  check(s2 >= 1, "s2 must be >= 1");
  auto variant_ok = [&](Variant v) {
    switch (family) {
      case problems::Family::kOde: return v == Variant::kInDistribution;
      case problems::Family::kBurgers: return v != Variant::kEllipse;
      case problems::Family::kLaplace: return v == Variant::kInDistribution || v == Variant::kEllipse;
    }
    return false;
  };
  check(variant_ok(s1_variant), std::string("s1_variant '") + variant_name(s1_variant) + "' does not apply to " +
                                    problems::family_name(family));
  check(variant_ok(s2_variant), std::string("s2_variant '") + variant_name(s2_variant) + "' does not apply to " +
                                    problems::family_name(family));
  if (family == problems::Family::kOde) {
    check(ode.grid >= 2 && ode.hi > ode.lo, "ode: need grid >= 2 and hi > lo");
    const std::set<int> held(ode.held_out.begin(), ode.held_out.end());
    check(!held.empty() && held.size() == ode.held_out.size(), "ode: held_out must be non-empty and distinct");
    check(*held.begin() >= 0 && *held.rbegin() < ode.grid, "ode: held_out index out of range");
    check(static_cast<int>(held.size()) < ode.grid, "ode: S1 would be empty");
  } else {
    check(s1 >= 1, "s1 must be >= 1");
  }
  if (family == problems::Family::kBurgers) {
    check(burgers.nu > 0.0, "burgers: nu must be > 0");
    check(burgers.nx >= 8 && (burgers.nx & (burgers.nx - 1)) == 0, "burgers: nx must be a power of two >= 8");
    check(burgers.nt >= 2 && burgers.substeps >= 1, "burgers: need nt >= 2 and substeps >= 1");
    check(burgers.eval_stride_x >= 1 && burgers.eval_stride_t >= 1, "burgers: strides must be >= 1");
  }
  if (family == problems::Family::kLaplace) check(laplace.eval_points >= 1, "laplace: eval_points must be >= 1");
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
  pretrain.seed = seed;
  finetune.seed = seed;
  source.seed = seed;
}

void ExperimentConfig::make_strict() {
  pretrain.strict = true;
  finetune.strict = true;
  source.strict = true;
}

ExperimentConfig parse_experiment(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  reject_unknown(j,
                 {"family", "ode", "burgers", "laplace", "s1", "s2", "s1_variant", "s2_variant", "network",
                  "pretrain", "finetune", "source", "threshold", "seeds", "out"},
                 "config");
  ExperimentConfig c;
  if (!j.contains("family")) throw ConfigError("config: missing 'family'");
  std::string family;
  read(j, "family", family, "config");
  try {
    c.family = problems::parse_family(family);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.family: ") + e.what());
  }
  if (j.contains("ode")) {
    const json& o = j.at("ode");
    reject_unknown(o, {"grid", "lo", "hi", "held_out"}, "ode");
    read(o, "grid", c.ode.grid, "ode");
    read(o, "lo", c.ode.lo, "ode");
    read(o, "hi", c.ode.hi, "ode");
    if (o.contains("held_out")) {
      if (!o.at("held_out").is_array()) throw ConfigError("ode.held_out: wrong type");
      c.ode.held_out.clear();
      for (const auto& v : o.at("held_out")) {
        if (!v.is_number_integer()) throw ConfigError("ode.held_out: wrong type");
        c.ode.held_out.push_back(v.get<int>());
      }
    }
  }
  if (j.contains("burgers")) {
    const json& b = j.at("burgers");
    reject_unknown(b, {"nu", "nx", "nt", "substeps", "eval_stride_x", "eval_stride_t"}, "burgers");
    read(b, "nu", c.burgers.nu, "burgers");
    read(b, "nx", c.burgers.nx, "burgers");
    read(b, "nt", c.burgers.nt, "burgers");
    read(b, "substeps", c.burgers.substeps, "burgers");
    read(b, "eval_stride_x", c.burgers.eval_stride_x, "burgers");
    read(b, "eval_stride_t", c.burgers.eval_stride_t, "burgers");
  }
  if (j.contains("laplace")) {
    const json& l = j.at("laplace");
    reject_unknown(l, {"eval_points"}, "laplace");
    read(l, "eval_points", c.laplace.eval_points, "laplace");
  }
  read(j, "s1", c.s1, "config");
  read(j, "s2", c.s2, "config");
  for (const char* key : {"s1_variant", "s2_variant"}) {
    if (!j.contains(key)) continue;
    std::string v;
    read(j, key, v, "config");
    (std::string(key) == "s1_variant" ? c.s1_variant : c.s2_variant) = parse_variant(v, std::string("config.") + key);
  }
  c.network = read_network(j, c.family);
  c.pretrain = read_train(j, "pretrain", "config");
  c.finetune = read_train(j, "finetune", "config");
  c.source = read_train(j, "source", "config");
  read(j, "threshold", c.threshold, "config");
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    reject_unknown(s, {"tasks", "held_out", "baseline"}, "seeds");
    read(s, "tasks", c.task_seed, "seeds");
    read(s, "held_out", c.held_out_seed, "seeds");
    read(s, "baseline", c.baseline_seed, "seeds");
  }
  std::string out = c.out.string();
  read(j, "out", out, "config");
  c.out = out;
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_experiment(ss.str());
}

namespace {

std::vector<problems::InstancePtr> sample_tasks(const ExperimentConfig& c, Variant v, int count, std::uint64_t seed) {
  problems::Rng rng(seed);
  std::vector<problems::InstancePtr> out;
  for (int i = 0; i < count; ++i) {
    if (c.family == problems::Family::kBurgers) {
      const auto law = v == Variant::kExtrapolationGrf ? problems::burgers_extrapolation_grf() : problems::burgers_grf();
      auto s = problems::burgers_spec_sample(rng, law, c.burgers.nu, v == Variant::kHeterogeneousNu);
      s.reference.nx = c.burgers.nx;
      s.reference.nt = c.burgers.nt;
      s.reference.substeps = c.burgers.substeps;
      s.eval_stride_x = c.burgers.eval_stride_x;
      s.eval_stride_t = c.burgers.eval_stride_t;
      out.push_back(problems::make_instance(problems::InstanceSpec{s}));
    } else {
      auto s = v == Variant::kEllipse ? problems::laplace_ellipse_spec(rng) : problems::laplace_polygon_spec(rng);
      s.eval_points = c.laplace.eval_points;
      out.push_back(problems::make_instance(problems::InstanceSpec{s}));
    }
  }
  return out;
}

std::vector<problems::InstancePtr> ode_tasks(const ExperimentConfig& c, bool held) {
  const auto grid = problems::ode_eta_grid(c.ode.grid, c.ode.lo, c.ode.hi);
  const std::set<int> out_set(c.ode.held_out.begin(), c.ode.held_out.end());
  std::vector<problems::InstancePtr> out;
  for (int i = 0; i < c.ode.grid; ++i) {
    if (out_set.count(i) == static_cast<std::size_t>(held)) {
      out.push_back(problems::ode_instance(grid[static_cast<std::size_t>(i)]));
    }
  }
  return out;
}

}  // namespace

std::vector<problems::InstancePtr> sample_s1(const ExperimentConfig& c) {
  if (c.family == problems::Family::kOde) return ode_tasks(c, false);
  return sample_tasks(c, c.s1_variant, c.s1, c.task_seed);
}

std::vector<problems::InstancePtr> sample_s2(const ExperimentConfig& c) {
  if (c.family == problems::Family::kOde) return ode_tasks(c, true);
  return sample_tasks(c, c.s2_variant, c.s2, c.held_out_seed);
}

}  // namespace madrom::cli
