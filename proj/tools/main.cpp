// madrom: experiment driver. Exit codes: 0 success, 2 config error,
// 3 numerical divergence, 4 I/O error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "experiment.hpp"
#include "json.hpp"
#include "madrom/errors.hpp"
#include "madrom/eval/manifold_gap.hpp"
#include "madrom/eval/metrics.hpp"
#include "madrom/eval/pca.hpp"
#include "madrom/persist/checkpoint.hpp"
#include "madrom/persist/csv.hpp"
#include "madrom/problems/burgers.hpp"
#include "madrom/problems/instance_spec.hpp"
#include "madrom/training/baselines.hpp"
#include "madrom/training/trainer.hpp"

namespace fs = std::filesystem;
using namespace madrom;

namespace {

struct Options {
  std::string config;
  std::string checkpoint;
  std::string traces;
  std::string mode = "mad-lm";
  std::string which;
  std::string what;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::string out;
  int task = 0;
  double radius = 1.0;
};

cli::ExperimentConfig load_config(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  auto c = cli::load_experiment(o.config);
  if (o.seed) c.override_seed(*o.seed);
  if (o.strict) c.make_strict();
  if (!o.out.empty()) c.out = o.out;
  return c;
}

fs::path out_dir(const Options& o, const std::optional<cli::ExperimentConfig>& c) {
  const fs::path dir = !o.out.empty() ? fs::path(o.out) : c ? c->out : fs::path("runs");
  fs::create_directories(dir);
  return dir;
}

void write_trace(const fs::path& path, const train::RunTrace& trace) {
  fs::create_directories(path.parent_path());
  std::ostringstream os;
  trace.write_csv(os);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << os.str();
    if (!f) throw IoError("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

void write_text(const fs::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
  }
  fs::rename(tmp, path);
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string task_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "task%03zu", k);
  return buf;
}

// One row per held-out task, then a JSON summary next to it.
struct Summary {
  std::vector<std::string> header{"task", "final_relative_l2", "iterations_to_threshold", "weights_hash"};
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> tasks;
  std::vector<double> finals;
  std::vector<std::optional<std::int64_t>> hits;

  void add(const std::string& task, const train::RunTrace& trace, double tau, std::uint64_t weights_hash,
           std::vector<std::string> extra = {}) {
    const double final_err = trace.final_relative_l2().value_or(std::nan(""));
    const auto hit = eval::iterations_to_threshold(trace, tau);
    std::vector<std::string> row{task, persist::format_double(final_err), hit ? std::to_string(*hit) : "",
                                 hex(weights_hash)};
    row.insert(row.end(), extra.begin(), extra.end());
    rows.push_back(std::move(row));
    tasks.push_back(task);
    finals.push_back(final_err);
    hits.push_back(hit);
  }

  void write(const fs::path& dir, const std::string& method, double tau) const {
    persist::write_csv(dir / "summary.csv", header, rows);
    const auto report = eval::ErrorReport::from(tasks, finals);
    nlohmann::json j;
    j["method"] = method;
    j["tasks"] = tasks.size();
    j["mean_final_relative_l2"] = report.mean;
    j["ci95_half_width"] = report.half_width;
    j["threshold"] = tau;
    const double med = eval::median_iterations(hits);
    j["median_iterations_to_threshold"] = std::isfinite(med) ? nlohmann::json(med) : nlohmann::json(nullptr);
    write_text(dir / "summary.json", j.dump(2) + "\n");
    std::cout << method << ": mean final relative L2 " << report.mean << " +- " << report.half_width << " over "
              << tasks.size() << " tasks\n";
  }
};

// ---------------------------------------------------------------- pretrain

int cmd_pretrain(const Options& o) {
  const auto c = load_config(o);
  const auto dir = out_dir(o, c);
  const auto tasks = cli::sample_s1(c);
  const auto res = train::pretrain(c.network, c.pretrain, tasks);
  persist::save(res.model, dir / "checkpoint.madrom");
  write_trace(dir / "pretrain_trace.csv", res.trace);
  auto manifest = nlohmann::json::parse(persist::manifest_json(res.model.manifest));
  manifest["weights_hash"] = hex(res.model.weights.hash());
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "pretrained " << tasks.size() << " tasks; checkpoint " << (dir / "checkpoint.madrom").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- finetune

int cmd_finetune(const Options& o) {
  const auto c = load_config(o);
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  const auto mode = [&] {
    try {
      return train::parse_mode(o.mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const auto model = persist::load_model(o.checkpoint);
  if (model.family != c.family) {
    throw ConfigError(std::string("checkpoint family '") + problems::family_name(model.family) +
                      "' does not match config family '" + problems::family_name(c.family) + "'");
  }
  const auto dir = out_dir(o, c) / "finetune" / train::mode_name(mode);
  fs::create_directories(dir);
  const auto held = cli::sample_s2(c);
  Summary summary;
  for (std::size_t k = 0; k < held.size(); ++k) {
    const auto r = train::finetune(c.finetune, model, *held[k], mode);
    write_trace(dir / (task_name(k) + ".csv"), r.trace);
    summary.add(task_name(k), r.trace, c.threshold, r.weights.hash());
  }
  summary.write(dir, train::mode_name(mode), c.threshold);
  return 0;
}

// ---------------------------------------------------------------- baseline

int cmd_baseline(const Options& o) {
  const auto c = load_config(o);
  if (o.which != "from-scratch" && o.which != "transfer" && o.which != "reptile") {
    throw ConfigError("unknown baseline '" + o.which + "' (from-scratch, transfer, reptile)");
  }
  if (!o.checkpoint.empty()) std::cerr << "warning: " << o.which << " ignores --checkpoint\n";
  auto net_config = c.network;
  net_config.latent_dim = 0;
  net_config.insert_latent_at.reset();
  const auto dir = out_dir(o, c) / "baseline" / o.which;
  fs::create_directories(dir);
  const auto held = cli::sample_s2(c);
  Summary summary;

  if (o.which == "from-scratch") {
    for (std::size_t k = 0; k < held.size(); ++k) {
      const auto r = train::from_scratch(net_config, c.finetune, *held[k]);
      write_trace(dir / (task_name(k) + ".csv"), r.trace);
      summary.add(task_name(k), r.trace, c.threshold, r.weights.hash());
    }
  } else if (o.which == "transfer") {
    const auto s1 = cli::sample_s1(c);
    problems::Rng rng(c.baseline_seed);
    std::uniform_int_distribution<std::size_t> pick(0, s1.size() - 1);
    summary.header.push_back("source_task");
    for (std::size_t k = 0; k < held.size(); ++k) {
      const std::size_t source = pick(rng);
      const auto r = train::transfer_learning(net_config, c.source, c.finetune, *s1[source], *held[k]);
      write_trace(dir / (task_name(k) + ".csv"), r.trace);
      summary.add(task_name(k), r.trace.filter("target"), c.threshold, r.weights.hash(), {std::to_string(source)});
    }
  } else {
    const auto s1 = cli::sample_s1(c);
    const auto meta = train::reptile_pretrain(net_config, c.pretrain, s1);
    persist::save(meta.weights, dir / "reptile_weights.madrom");
    write_trace(dir / "reptile_trace.csv", meta.trace);
    for (std::size_t k = 0; k < held.size(); ++k) {
      const auto r = train::train_weights(meta.weights, c.finetune, *held[k], "target");
      write_trace(dir / (task_name(k) + ".csv"), r.trace);
      summary.add(task_name(k), r.trace, c.threshold, r.weights.hash());
    }
  }
  summary.write(dir, o.which, c.threshold);
  return 0;
}

// ---------------------------------------------------------------- eval

// Trace files under `root`, grouped by the directory holding them.
std::map<std::string, std::vector<fs::path>> find_traces(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("no trace directory " + root.string());
  std::map<std::string, std::vector<fs::path>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("task", 0) == 0 && e.path().extension() == ".csv") {
      out[fs::relative(e.path().parent_path(), root).generic_string()].push_back(e.path());
    }
  }
  for (auto& [method, files] : out) std::sort(files.begin(), files.end());
  return out;
}

train::RunTrace read_trace(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  auto trace = train::RunTrace::read_csv(is);
  // Transfer traces carry the source run first; only the target part counts.
  const auto target = trace.filter("target");
  return target.rows.empty() ? trace : target;
}

double threshold_of(const Options& o, double fallback) {
  if (o.config.empty()) return fallback;
  return load_config(o).threshold;
}

int cmd_eval(const Options& o) {
  if (o.traces.empty()) throw ConfigError("--traces is required");
  const double tau = threshold_of(o, 0.1);
  const auto groups = find_traces(o.traces);
  const auto dir = out_dir(o, std::nullopt);
  std::vector<std::vector<std::string>> rows;
  for (const auto& [method, files] : groups) {
    std::vector<std::string> tasks;
    std::vector<double> finals;
    std::vector<std::optional<std::int64_t>> hits;
    for (const auto& f : files) {
      const auto trace = read_trace(f);
      tasks.push_back(f.stem().string());
      finals.push_back(trace.final_relative_l2().value_or(std::nan("")));
      hits.push_back(eval::iterations_to_threshold(trace, tau));
    }
    const auto report = eval::ErrorReport::from(tasks, finals);
    const double med = eval::median_iterations(hits);
    rows.push_back({method, std::to_string(files.size()), persist::format_double(report.mean),
                    persist::format_double(report.half_width), persist::format_double(tau),
                    std::isfinite(med) ? persist::format_double(med) : ""});
    std::cout << method << ": mean " << report.mean << " +- " << report.half_width << ", median iterations to "
              << tau << ": " << (std::isfinite(med) ? std::to_string(med) : std::string("never")) << "\n";
  }
  persist::write_csv(dir / "eval.csv",
                     {"method", "tasks", "mean_final_relative_l2", "ci95_half_width", "threshold",
                      "median_iterations_to_threshold"},
                     rows);
  return 0;
}

// ---------------------------------------------------------------- viz

Eigen::ArrayXd decode(const train::PretrainedModel& m, const Eigen::ArrayXXd& points, const Eigen::VectorXd& z) {
  return net::forward(m.weights, points, z).row(0).transpose();
}

// Grid shared by every task of the family, so that functions can be compared.
Eigen::ArrayXXd shared_grid(const train::PretrainedModel& m, const std::vector<problems::InstancePtr>& tasks) {
  if (m.family != problems::Family::kLaplace) return tasks.front()->evaluation_set().points;
  // Laplace references extend harmonically to the whole unit disk.
  problems::Rng rng(0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::ArrayXXd grid(2, 1024);
  for (Eigen::Index j = 0; j < grid.cols(); ++j) {
    const double r = std::sqrt(u(rng)), phi = 2 * M_PI * u(rng);
    grid.col(j) << r * std::cos(phi), r * std::sin(phi);
  }
  return grid;
}

void viz_pca(const train::PretrainedModel& m, const fs::path& dir) {
  std::vector<problems::InstancePtr> tasks;
  for (const auto& s : m.tasks) tasks.push_back(problems::make_instance(s));
  if (tasks.size() < 3) throw ConfigError("pca needs at least three pre-training tasks");
  const auto grid = shared_grid(m, tasks);
  Eigen::MatrixXd exact(static_cast<Eigen::Index>(tasks.size()), grid.cols());
  Eigen::MatrixXd decoded(exact.rows(), exact.cols());
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    exact.row(static_cast<Eigen::Index>(k)) = tasks[k]->reference(grid).matrix().transpose();
    decoded.row(static_cast<Eigen::Index>(k)) = decode(m, grid, m.bank.latents[k].components).matrix().transpose();
  }
  const auto p = eval::pca_project(exact);
  const Eigen::MatrixXd dec = (decoded.rowwise() - p.mean.transpose()) * p.components;
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index k = 0; k < exact.rows(); ++k) {
    rows.push_back({"exact", task_name(static_cast<std::size_t>(k)), persist::format_double(p.coords(k, 0)),
                    persist::format_double(p.coords(k, 1))});
  }
  for (Eigen::Index k = 0; k < dec.rows(); ++k) {
    rows.push_back({"decoded", task_name(static_cast<std::size_t>(k)), persist::format_double(dec(k, 0)),
                    persist::format_double(dec(k, 1))});
  }
  persist::write_csv(dir / "pca.csv", {"kind", "task", "pc1", "pc2"}, rows);
  persist::write_csv(dir / "pca_explained.csv", {"component", "fraction"},
                     {{"1", persist::format_double(p.explained[0])}, {"2", persist::format_double(p.explained[1])}});
}

void viz_curves(const fs::path& traces, const fs::path& dir) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [method, files] : find_traces(traces)) {
    for (const auto& f : files) {
      for (const auto& row : read_trace(f).rows) {
        if (!row.relative_l2) continue;
        rows.push_back({method, f.stem().string(), std::to_string(row.iteration),
                        persist::format_double(*row.relative_l2)});
      }
    }
  }
  persist::write_csv(dir / "curves.csv", {"method", "task", "iteration", "relative_l2"}, rows);
}

void viz_fields(const train::PretrainedModel& m, int task, const fs::path& dir) {
  if (task < 0 || task >= static_cast<int>(m.tasks.size())) throw ConfigError("--task out of range");
  const auto inst = problems::make_instance(m.tasks[static_cast<std::size_t>(task)]);
  const auto& z = m.bank.latents[static_cast<std::size_t>(task)].components;
  std::vector<std::vector<std::string>> rows;
  if (m.family == problems::Family::kBurgers) {
    const auto& b = dynamic_cast<const problems::BurgersInstance&>(*inst);
    const auto& field = b.reference_field();
    const int nx = field.options.nx;
    for (double t : {0.0, 0.5, 1.0}) {
      Eigen::ArrayXXd pts(2, nx);
      for (int j = 0; j < nx; ++j) pts.col(j) << field.x(j), t;
      const auto ref = inst->reference(pts);
      const auto pred = decode(m, pts, z);
      for (int j = 0; j < nx; ++j) {
        rows.push_back({persist::format_double(pts(0, j)), persist::format_double(t), persist::format_double(ref[j]),
                        persist::format_double(pred[j])});
      }
    }
    persist::write_csv(dir / "fields.csv", {"x", "t", "reference", "prediction"}, rows);
    return;
  }
  const auto& e = inst->evaluation_set();
  const auto pred = decode(m, e.points, z);
  const bool two_d = e.points.rows() == 2;
  for (Eigen::Index j = 0; j < e.points.cols(); ++j) {
    std::vector<std::string> row{persist::format_double(e.points(0, j))};
    if (two_d) row.push_back(persist::format_double(e.points(1, j)));
    row.push_back(persist::format_double(e.values[j]));
    row.push_back(persist::format_double(pred[j]));
    rows.push_back(std::move(row));
  }
  persist::write_csv(dir / "fields.csv",
                     two_d ? std::vector<std::string>{"x", "y", "reference", "prediction"}
                           : std::vector<std::string>{"x", "reference", "prediction"},
                     rows);
}

void viz_gap(const train::PretrainedModel& m, const std::vector<problems::InstancePtr>& targets, double radius,
             const fs::path& dir) {
  eval::GapOptions opt;
  opt.radius = radius;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto& e = targets[k]->evaluation_set();
    const auto r = eval::empirical_manifold_gap(m.weights, e.points, e.values, opt);
    rows.push_back({task_name(k), persist::format_double(r.gap), persist::format_double(r.latent.norm())});
  }
  persist::write_csv(dir / "gap.csv", {"task", "gap", "latent_norm"}, rows);
}

int cmd_viz(const Options& o) {
  const auto dir = out_dir(o, std::nullopt) / "viz";
  fs::create_directories(dir);
  if (o.what == "curves") {
    if (o.traces.empty()) throw ConfigError("viz curves needs --traces");
    viz_curves(o.traces, dir);
    return 0;
  }
  if (o.what != "pca" && o.what != "fields" && o.what != "gap") {
    throw ConfigError("unknown viz target '" + o.what + "' (pca, curves, fields, gap)");
  }
  if (o.checkpoint.empty()) throw ConfigError("viz " + o.what + " needs --checkpoint");
  const auto model = persist::load_model(o.checkpoint);
  if (o.what == "pca") viz_pca(model, dir);
  if (o.what == "fields") viz_fields(model, o.task, dir);
  if (o.what == "gap") {
    std::vector<problems::InstancePtr> targets;
    if (!o.config.empty()) {
      targets = cli::sample_s2(load_config(o));
    } else {
      for (const auto& s : model.tasks) targets.push_back(problems::make_instance(s));
    }
    viz_gap(model, targets, o.radius, dir);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"madrom: meta-auto-decoder reduced-order models"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", o.config, "Experiment config (JSON)");
    if (config_required) opt->required();
    sub->add_option("--seed", o.seed, "Override every training seed");
    sub->add_flag("--strict", o.strict, "Byte-reproducible outputs");
    sub->add_option("--out", o.out, "Run directory (overrides the config)");
  };
  auto* pre = app.add_subcommand("pretrain", "Pre-train decoder and latents on S1");
  common(pre, true);
  auto* ft = app.add_subcommand("finetune", "Fine-tune on every S2 task");
  common(ft, true);
  ft->add_option("--checkpoint", o.checkpoint, "Pre-trained checkpoint")->required();
  ft->add_option("--mode", o.mode, "mad-l or mad-lm");
  auto* base = app.add_subcommand("baseline", "Run a baseline over S2");
  common(base, true);
  base->add_option("which", o.which, "from-scratch, transfer or reptile")->required();
  base->add_option("--checkpoint", o.checkpoint, "Ignored");
  auto* ev = app.add_subcommand("eval", "Summarize trace CSVs");
  common(ev, false);
  ev->add_option("--traces", o.traces, "Directory with per-task traces")->required();
  auto* viz = app.add_subcommand("viz", "Plot-ready CSV bundles");
  common(viz, false);
  viz->add_option("what", o.what, "pca, curves, fields or gap")->required();
  viz->add_option("--checkpoint", o.checkpoint, "Pre-trained checkpoint");
  viz->add_option("--traces", o.traces, "Directory with per-task traces");
  viz->add_option("--task", o.task, "Pre-training task for fields");
  viz->add_option("--radius", o.radius, "Latent ball radius for gap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*pre) return cmd_pretrain(o);
    if (*ft) return cmd_finetune(o);
    if (*base) return cmd_baseline(o);
    if (*ev) return cmd_eval(o);
    if (*viz) return cmd_viz(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  }
  return 1;
}
