#include "madrom/persist/checkpoint.hpp"

#include <set>
#include <stdexcept>

#include "json.hpp"
#include "madrom/errors.hpp"

namespace madrom::persist {

using nlohmann::json;

namespace {

void write_series(ByteWriter& w, const problems::FourierSeries& f) {
  w.f64(f.a0);
  w.f64(f.period);
  w.f64s(f.a);
  w.f64s(f.b);
}

problems::FourierSeries read_series(ByteReader& r) {
  problems::FourierSeries f;
  f.a0 = r.f64();
  f.period = r.f64();
  f.a = r.f64s();
  f.b = r.f64s();
  if (f.a.size() != f.b.size()) throw IoError("fourier series: coefficient lengths differ");
  return f;
}

void write_kind(std::vector<Section>& out, Kind kind) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(kind));
  out.push_back({make_tag("KIND"), w.take()});
}

void expect_kind(const std::vector<Section>& sections, Kind kind) {
  ByteReader r(find_section(sections, "KIND"));
  const std::uint32_t k = r.u32();
  if (k != static_cast<std::uint32_t>(kind)) {
    throw IoError("file holds object kind " + std::to_string(k) + ", expected " +
                  std::to_string(static_cast<std::uint32_t>(kind)));
  }
}

void write_weights(ByteWriter& w, const net::NetworkWeights& weights) { w.f64s(weights.flat()); }

net::NetworkWeights read_weights(ByteReader& r, const net::NetworkConfig& config) {
  net::NetworkWeights weights(config);
  const std::vector<double> flat = r.f64s();
  if (flat.size() != weights.size()) throw IoError("weight count does not match the network config");
  std::copy(flat.begin(), flat.end(), weights.flat().begin());
  return weights;
}

template <class F>
Section section(const char* tag, F&& fill) {
  ByteWriter w;
  fill(w);
  return {make_tag(tag), w.take()};
}

template <class T, class F>
T parse_section(const std::vector<Section>& sections, const char* tag, F&& read) {
  ByteReader r(find_section(sections, tag));
  T out = read(r);
  r.expect_done(tag);
  return out;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_key(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

}  // namespace

void write_network_config(ByteWriter& w, const net::NetworkConfig& c) {
  w.i32(c.depth);
  w.i32(c.width);
  w.i32(c.spatial_dim);
  w.i32(c.output_dim);
  w.i32(c.latent_dim);
  w.f64(c.first_layer_scale);
  w.u8(c.insert_latent_at ? 1 : 0);
  w.i32(c.insert_latent_at.value_or(0));
  w.u8(c.periodic_embedding ? 1 : 0);
  w.i32(c.periodic_embedding ? c.periodic_embedding->coordinate : 0);
  w.f64(c.periodic_embedding ? c.periodic_embedding->period : 1.0);
}

net::NetworkConfig read_network_config(ByteReader& r) {
  net::NetworkConfig c;
  c.depth = r.i32();
  c.width = r.i32();
  c.spatial_dim = r.i32();
  c.output_dim = r.i32();
  c.latent_dim = r.i32();
  c.first_layer_scale = r.f64();
  const bool insert = r.u8() != 0;
  const int at = r.i32();
  if (insert) c.insert_latent_at = at;
  const bool periodic = r.u8() != 0;
  const int coord = r.i32();
  const double period = r.f64();
  if (periodic) c.periodic_embedding = net::PeriodicEmbedding{coord, period};
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("stored network config is invalid: ") + e.what());
  }
  return c;
}

void write_instance_spec(ByteWriter& w, const problems::InstanceSpec& s) {
  w.u8(static_cast<std::uint8_t>(s.family()));
  if (const auto* o = std::get_if<problems::OdeSpec>(&s.data)) {
    w.f64(o->eta);
    w.i32(o->eval_points);
  } else if (const auto* b = std::get_if<problems::BurgersSpec>(&s.data)) {
    write_series(w, b->u0);
    w.f64(b->nu);
    w.u8(b->heterogeneous ? 1 : 0);
    w.i32(b->reference.nx);
    w.i32(b->reference.nt);
    w.i32(b->reference.substeps);
    w.f64(b->reference.t_final);
    w.i32(b->eval_stride_x);
    w.i32(b->eval_stride_t);
  } else {
    const auto& l = std::get<problems::LaplaceSpec>(s.data);
    if (const auto* poly = std::get_if<problems::ConvexPolygon>(&l.shape)) {
      w.u8(0);
      w.u64(poly->vertices.size());
      for (const auto& v : poly->vertices) {
        w.f64(v.x());
        w.f64(v.y());
      }
    } else {
      const auto& e = std::get<problems::Ellipse>(l.shape);
      w.u8(1);
      w.f64(e.center.x());
      w.f64(e.center.y());
      w.f64(e.semi_a);
      w.f64(e.semi_b);
      w.f64(e.rotation);
    }
    write_series(w, l.boundary_data);
    w.u64(l.eval_seed);
    w.i32(l.eval_points);
  }
}

problems::InstanceSpec read_instance_spec(ByteReader& r) {
  const auto family = r.u8();
  switch (family) {
    case static_cast<std::uint8_t>(problems::Family::kOde): {
      problems::OdeSpec o;
      o.eta = r.f64();
      o.eval_points = r.i32();
      return {o};
    }
    case static_cast<std::uint8_t>(problems::Family::kBurgers): {
      problems::BurgersSpec b;
      b.u0 = read_series(r);
      b.nu = r.f64();
      b.heterogeneous = r.u8() != 0;
      b.reference.nx = r.i32();
      b.reference.nt = r.i32();
      b.reference.substeps = r.i32();
      b.reference.t_final = r.f64();
      b.eval_stride_x = r.i32();
      b.eval_stride_t = r.i32();
      return {b};
    }
    case static_cast<std::uint8_t>(problems::Family::kLaplace): {
      problems::LaplaceSpec l;
      const auto shape = r.u8();
      if (shape == 0) {
        problems::ConvexPolygon poly;
        const std::uint64_t k = r.u64();
        if (k > 64) throw IoError("polygon: implausible vertex count");
        for (std::uint64_t i = 0; i < k; ++i) {
          const double x = r.f64();
          const double y = r.f64();
          poly.vertices.emplace_back(x, y);
        }
        l.shape = std::move(poly);
      } else if (shape == 1) {
        problems::Ellipse e;
        const double cx = r.f64();
        const double cy = r.f64();
        e.center = Eigen::Vector2d(cx, cy);
        e.semi_a = r.f64();
        e.semi_b = r.f64();
        e.rotation = r.f64();
        l.shape = e;
      } else {
        throw IoError("unknown laplace domain kind " + std::to_string(shape));
      }
      l.boundary_data = read_series(r);
      l.eval_seed = r.u64();
      l.eval_points = r.i32();
      return {l};
    }
    default:
      throw IoError("unknown problem family tag " + std::to_string(family));
  }
}

void write_bank(ByteWriter& w, const train::LatentBank& bank) {
  const auto count = bank.latents.size();
  const int n = bank.latent_dim();
  w.u64(count);
  w.u32(static_cast<std::uint32_t>(n));
  for (const auto& l : bank.latents) {
    if (l.components.size() != n) throw std::invalid_argument("latent bank: ragged latent sizes");
    for (Eigen::Index k = 0; k < n; ++k) w.f64(l.components[k]);
  }
  for (const auto& l : bank.latents) w.i64(l.owner);
  w.u64(bank.descriptors.size());
  for (const auto& d : bank.descriptors) {
    w.f64s({d.data(), static_cast<std::size_t>(d.size())});
  }
}

train::LatentBank read_bank(ByteReader& r) {
  train::LatentBank bank;
  const std::uint64_t count = r.u64();
  const std::uint32_t n = r.u32();
  if (count > (1u << 24) || n > (1u << 20)) throw IoError("latent bank: implausible size");
  bank.latents.resize(count);
  for (auto& l : bank.latents) {
    l.components.resize(n);
    for (std::uint32_t k = 0; k < n; ++k) l.components[k] = r.f64();
  }
  for (auto& l : bank.latents) l.owner = r.i64();
  const std::uint64_t nd = r.u64();
  if (nd != 0 && nd != count) throw IoError("latent bank: descriptor count mismatch");
  for (std::uint64_t i = 0; i < nd; ++i) {
    const auto d = r.f64s();
    bank.descriptors.emplace_back(Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size())));
  }
  return bank;
}

namespace {

json train_config_to_json(const train::TrainConfig& c) {
  json j;
  j["interior_samples"] = c.interior_samples;
  j["boundary_samples"] = c.boundary_samples;
  j["boundary_weight"] = c.boundary_weight;
  j["latent_penalty"] = c.latent_penalty;
  j["loss_exponent"] = c.loss_exponent;
  j["lr"] = c.lr;
  j["latent_lr"] = c.latent_lr ? json(*c.latent_lr) : json(nullptr);
  j["milestones"] = c.milestones;
  j["decay"] = c.decay;
  j["iterations"] = c.iterations;
  j["eval_every"] = c.eval_every;
  j["latent_init_std"] = c.latent_init_std;
  j["penalty_in_finetune"] = c.penalty_in_finetune;
  j["reptile_inner_steps"] = c.reptile_inner_steps;
  j["reptile_step"] = c.reptile_step;
  j["strict"] = c.strict;
  j["seed"] = c.seed;
  return j;
}

train::TrainConfig train_config_from_json(const json& j, const std::string& where) {
  reject_unknown(j,
                 {"interior_samples", "boundary_samples", "boundary_weight", "latent_penalty", "loss_exponent",
                  "lr", "latent_lr", "milestones", "decay", "iterations", "eval_every", "latent_init_std",
                  "penalty_in_finetune", "reptile_inner_steps", "reptile_step", "strict", "seed"},
                 where);
  train::TrainConfig c;
  read_key(j, "interior_samples", c.interior_samples, where);
  read_key(j, "boundary_samples", c.boundary_samples, where);
  read_key(j, "boundary_weight", c.boundary_weight, where);
  read_key(j, "latent_penalty", c.latent_penalty, where);
  read_key(j, "loss_exponent", c.loss_exponent, where);
  read_key(j, "lr", c.lr, where);
  if (j.contains("latent_lr") && !j.at("latent_lr").is_null()) {
    double v = 0.0;
    read_key(j, "latent_lr", v, where);
    c.latent_lr = v;
  }
  read_key(j, "milestones", c.milestones, where);
  read_key(j, "decay", c.decay, where);
  read_key(j, "iterations", c.iterations, where);
  read_key(j, "eval_every", c.eval_every, where);
  read_key(j, "latent_init_std", c.latent_init_std, where);
  read_key(j, "penalty_in_finetune", c.penalty_in_finetune, where);
  read_key(j, "reptile_inner_steps", c.reptile_inner_steps, where);
  read_key(j, "reptile_step", c.reptile_step, where);
  read_key(j, "strict", c.strict, where);
  read_key(j, "seed", c.seed, where);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return c;
}

}  // namespace

std::string train_config_json(const train::TrainConfig& c) { return train_config_to_json(c).dump(); }

train::TrainConfig parse_train_config_json(const std::string& text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return train_config_from_json(j, where);
}

std::string manifest_json(const train::Manifest& m) {
  json j;
  j["code_version"] = m.code_version;
  j["iterations"] = m.iterations;
  j["init_seed"] = m.init_seed;
  j["train"] = train_config_to_json(m.config);
  return j.dump(2);
}

train::Manifest parse_manifest_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    train::Manifest m;
    m.code_version = j.at("code_version").get<std::string>();
    m.iterations = j.at("iterations").get<std::int64_t>();
    m.init_seed = j.at("init_seed").get<std::uint64_t>();
    m.config = train_config_from_json(j.at("train"), "manifest.train");
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  }
}

Bytes encode_model(const train::PretrainedModel& model) {
  std::vector<Section> s;
  write_kind(s, Kind::kModel);
  s.push_back(section("NCFG", [&](ByteWriter& w) { write_network_config(w, model.weights.config()); }));
  s.push_back(section("WGTS", [&](ByteWriter& w) { write_weights(w, model.weights); }));
  s.push_back(section("LBNK", [&](ByteWriter& w) { write_bank(w, model.bank); }));
  s.push_back(section("FAML", [&](ByteWriter& w) {
    w.u8(static_cast<std::uint8_t>(model.family));
    w.u64(model.tasks.size());
    for (const auto& t : model.tasks) write_instance_spec(w, t);
  }));
  s.push_back(section("MNFT", [&](ByteWriter& w) { w.str(manifest_json(model.manifest)); }));
  return encode(s);
}

train::PretrainedModel decode_model(std::span<const std::uint8_t> bytes) {
  const auto sections = decode(bytes);
  expect_kind(sections, Kind::kModel);
  train::PretrainedModel m;
  const auto config = parse_section<net::NetworkConfig>(sections, "NCFG", read_network_config);
  m.weights = parse_section<net::NetworkWeights>(sections, "WGTS",
                                                 [&](ByteReader& r) { return read_weights(r, config); });
  m.bank = parse_section<train::LatentBank>(sections, "LBNK", read_bank);
  {
    ByteReader r(find_section(sections, "FAML"));
    const auto family = r.u8();
    if (family < 1 || family > 3) throw IoError("unknown problem family tag " + std::to_string(family));
    m.family = static_cast<problems::Family>(family);
    const std::uint64_t count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
      m.tasks.push_back(read_instance_spec(r));
      if (m.tasks.back().family() != m.family) throw IoError("task family differs from model family");
    }
    r.expect_done("FAML");
  }
  m.manifest = parse_section<train::Manifest>(sections, "MNFT",
                                              [](ByteReader& r) { return parse_manifest_json(r.str()); });
  if (m.bank.latent_dim() != config.latent_dim && !m.bank.latents.empty()) {
    throw IoError("latent size differs from the network config");
  }
  return m;
}

void save(const train::PretrainedModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(model));
}

void save(const train::LatentBank& bank, const std::filesystem::path& path) {
  std::vector<Section> s;
  write_kind(s, Kind::kBank);
  s.push_back(section("LBNK", [&](ByteWriter& w) { write_bank(w, bank); }));
  write_file_atomic(path, encode(s));
}

void save(const problems::InstanceSpec& spec, const std::filesystem::path& path) {
  std::vector<Section> s;
  write_kind(s, Kind::kInstance);
  s.push_back(section("INST", [&](ByteWriter& w) { write_instance_spec(w, spec); }));
  write_file_atomic(path, encode(s));
}

void save(const net::NetworkWeights& weights, const std::filesystem::path& path) {
  std::vector<Section> s;
  write_kind(s, Kind::kWeights);
  s.push_back(section("NCFG", [&](ByteWriter& w) { write_network_config(w, weights.config()); }));
  s.push_back(section("WGTS", [&](ByteWriter& w) { write_weights(w, weights); }));
  write_file_atomic(path, encode(s));
}

train::PretrainedModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

train::LatentBank load_bank(const std::filesystem::path& path) {
  const auto sections = decode(read_file(path));
  expect_kind(sections, Kind::kBank);
  return parse_section<train::LatentBank>(sections, "LBNK", read_bank);
}

problems::InstanceSpec load_instance(const std::filesystem::path& path) {
  const auto sections = decode(read_file(path));
  expect_kind(sections, Kind::kInstance);
  return parse_section<problems::InstanceSpec>(sections, "INST", read_instance_spec);
}

net::NetworkWeights load_weights(const std::filesystem::path& path) {
  const auto sections = decode(read_file(path));
  expect_kind(sections, Kind::kWeights);
  const auto config = parse_section<net::NetworkConfig>(sections, "NCFG", read_network_config);
  return parse_section<net::NetworkWeights>(sections, "WGTS",
                                            [&](ByteReader& r) { return read_weights(r, config); });
}

}  // namespace madrom::persist
