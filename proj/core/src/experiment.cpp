#include "satkit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "satkit/backbone_lab.hpp"
#include "satkit/cnf.hpp"
#include "satkit/dpll.hpp"
#include "satkit/errors.hpp"
#include "satkit/generator.hpp"
#include "satkit/parallel.hpp"
#include "satkit/rng.hpp"
#include "satkit/stats.hpp"
#include "satkit/wsat.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace satkit {

namespace {

constexpr int kSchemaVersion = 1;

std::string fmt(double v) {
  if (std::isnan(v))
    return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
std::string fmt(uint64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

double parse_double(const std::string &s) {
  double v = std::numeric_limits<double>::quiet_NaN();
  if (!s.empty())
    std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

struct Row {
  std::string key;
  std::vector<std::pair<std::string, std::string>> cols;

  void set(const std::string &name, std::string value) {
    for (auto &[c, v] : cols)
      if (c == name) {
        v = std::move(value);
        return;
      }
    cols.emplace_back(name, std::move(value));
  }
  std::string get(const std::string &name) const {
    for (auto &[c, v] : cols)
      if (c == name)
        return v;
    return "";
  }
  double num(const std::string &name) const { return parse_double(get(name)); }
};

/// Append-only JSONL checkpoint; last record per key wins on reload, so a
/// unit interrupted mid-way simply reruns and overwrites its rows.
class Checkpoint {
public:
  explicit Checkpoint(const fs::path &file) : file_(file) {
    if (fs::exists(file_)) {
      std::ifstream in(file_);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty())
          continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("key"))
          continue; // torn tail write from an interrupted run
        Row row;
        row.key = j["key"].get<std::string>();
        for (auto &[k, v] : j["cols"].items())
          row.cols.emplace_back(k, v.get<std::string>());
        rows_[row.key] = std::move(row);
      }
    }
    out_.open(file_, std::ios::app);
  }

  bool contains(const std::string &key) const {
    std::lock_guard<std::mutex> lock(mu_);
    return rows_.count(key) != 0;
  }

  void record(Row row) {
    json j;
    j["key"] = row.key;
    json cols = json::object();
    for (auto &[k, v] : row.cols)
      cols[k] = v;
    j["cols"] = std::move(cols);
    std::lock_guard<std::mutex> lock(mu_);
    out_ << j.dump() << "\n";
    out_.flush();
    rows_[row.key] = std::move(row);
  }

  std::map<std::string, Row> snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return rows_;
  }

private:
  fs::path file_;
  mutable std::mutex mu_;
  std::map<std::string, Row> rows_;
  std::ofstream out_;
};

void write_csv(const fs::path &path, const std::vector<std::string> &header,
               const std::vector<const Row *> &rows) {
  std::ofstream out(path, std::ios::binary);
  for (size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const Row *row : rows) {
    for (size_t i = 0; i < header.size(); ++i)
      out << (i ? "," : "") << row->get(header[i]);
    out << "\n";
  }
}

struct CellSpec {
  int index = 0;
  double ratio = 0.0;
  int m = 0;
  int bb_target = -1; // -1: uncontrolled
};

bool uses_backbone_control(ExperimentKind kind) {
  switch (kind) {
  case ExperimentKind::cost_vs_ratio_controlled:
  case ExperimentKind::nsolutions:
  case ExperimentKind::search_behavior:
  case ExperimentKind::robustness_vs_ratio:
  case ExperimentKind::robustness_correlation:
    return true;
  default:
    return false;
  }
}

std::vector<CellSpec> make_cells(const ExperimentConfig &cfg) {
  std::vector<CellSpec> cells;
  int idx = 0;
  for (double ratio : cfg.ratios) {
    int m = static_cast<int>(std::llround(ratio * cfg.n));
    if (uses_backbone_control(cfg.experiment)) {
      for (double frac : cfg.backbone_fractions)
        cells.push_back(
            {idx++, ratio, m, static_cast<int>(std::llround(frac * cfg.n))});
    } else {
      cells.push_back({idx++, ratio, m, -1});
    }
  }
  return cells;
}

std::string unit_key(int cell, int inst) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c%03d/i%05d", cell, inst);
  return buf;
}

struct Runner {
  const ExperimentConfig &cfg;
  Checkpoint &cp;
  std::vector<CellSpec> cells;
  fs::path out_dir;
  std::mutex file_mu; // instance exports

  explicit Runner(const ExperimentConfig &c, Checkpoint &k)
      : cfg(c), cp(k), cells(make_cells(c)), out_dir(c.out_dir) {}

  SolverBudget solver_budget() const { return {cfg.solver_max_decisions}; }

  uint64_t instance_seed(const CellSpec &cell, int inst) const {
    return derive_seed(cfg.root_seed, static_cast<uint64_t>(cell.index),
                       static_cast<uint64_t>(inst));
  }

  Row base_row(const CellSpec &cell, int inst, const std::string &key) const {
    Row row;
    row.key = key;
    row.set("experiment", to_string(cfg.experiment));
    row.set("cell", fmt(cell.index));
    row.set("ratio", fmt(cell.ratio));
    row.set("n", fmt(cfg.n));
    row.set("m", fmt(cell.m));
    if (cell.bb_target >= 0)
      row.set("bb_target", fmt(cell.bb_target));
    row.set("instance", fmt(inst));
    row.set("seed", fmt(instance_seed(cell, inst)));
    row.set("flag", "");
    return row;
  }

  /// Generates this unit's instance (satisfiable, optionally
  /// backbone-controlled). Returns false after recording a flagged row.
  bool generate(const CellSpec &cell, int inst, Row &row, CnfInstance &out,
                Backbone *backbone_out) {
    uint64_t seed = instance_seed(cell, inst);
    GenSpec spec{cfg.n, cell.m, 3, seed};
    Rng rng(seed);
    SampleReport rep;
    try {
      if (cell.bb_target >= 0) {
        out = sample_with_backbone_size(spec, cell.bb_target, rng,
                                        cfg.gen_budget, &rep,
                                        cfg.backbone_tolerance, backbone_out,
                                        solver_budget());
      } else {
        out = sample_satisfiable(spec, rng, cfg.gen_budget, &rep,
                                 solver_budget());
      }
    } catch (const BudgetExhausted &e) {
      row.set("flag", "gen_budget_exhausted");
      cp.record(row);
      return false;
    }
    row.set("attempts", fmt(rep.attempts));
    row.set("hash", fmt(out.content_hash()));
    return true;
  }

  InstanceCostStats cost_of(const CnfInstance &inst, uint64_t seed_salt,
                            uint64_t seed, bool probe5, bool record_uf,
                            const SolutionSet *solutions, int runs) const {
    CostParams params;
    params.runs = runs;
    params.workers = 1; // harness parallelism is across instances
    params.wsat.noise_p = cfg.noise_p;
    params.wsat.max_flips = cfg.max_flips;
    params.wsat.rng_seed = derive_seed(seed, seed_salt);
    if (probe5)
      params.wsat.probes = {5};
    params.wsat.record_uf = record_uf;
    return measure_cost(inst, params, solutions);
  }

  void set_cost_cols(Row &row, const InstanceCostStats &stats) const {
    row.set("cost", fmt(stats.cost));
    row.set("q25", fmt(stats.q25));
    row.set("q75", fmt(stats.q75));
    row.set("capped_runs", fmt(stats.cap_exceeded_runs));
  }

  void set_robustness_cols(Row &row, const CnfInstance &inst,
                           uint64_t seed) const {
    RobustnessParams params;
    params.min_trials = cfg.min_trials;
    params.rel_se = cfg.rel_se;
    params.max_trials = cfg.max_trials;
    params.workers = 1;
    params.solver_budget = solver_budget();
    try {
      RobustnessEstimate est =
          estimate_robustness(inst, derive_seed(seed, 2), params);
      row.set("robustness", fmt(est.mean));
      row.set("rob_se", fmt(est.std_error));
      row.set("rob_trials", fmt(est.trials));
      row.set("rob_converged", est.converged ? "1" : "0");
    } catch (const RobustnessUndefined &) {
      row.set("rob_flag", "empty_backbone");
    }
  }

  void export_instance(const CnfInstance &inst, const json &sidecar) {
    fs::path dir = out_dir / "instances";
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx",
                  static_cast<unsigned long long>(inst.content_hash()));
    std::lock_guard<std::mutex> lock(file_mu);
    fs::create_directories(dir);
    fs::path cnf = dir / (std::string(name) + ".cnf");
    if (!fs::exists(cnf))
      write_dimacs_file(inst, cnf.string());
    std::ofstream side(dir / (std::string(name) + ".json"));
    side << sidecar.dump(2) << "\n";
  }

  // --- per-kind unit bodies ------------------------------------------------

  void unit_cost_peak(const CellSpec &cell, int inst) {
    Row row = base_row(cell, inst, unit_key(cell.index, inst));
    CnfInstance instance;
    if (!generate(cell, inst, row, instance, nullptr))
      return;
    set_cost_cols(row, cost_of(instance, 1, instance_seed(cell, inst), false,
                               false, nullptr, cfg.runs_per_instance));
    cp.record(row);
  }

  void unit_controlled(const CellSpec &cell, int inst) {
    Row row = base_row(cell, inst, unit_key(cell.index, inst));
    CnfInstance instance;
    Backbone backbone;
    if (!generate(cell, inst, row, instance, &backbone))
      return;
    row.set("bb_size", fmt(backbone.size()));
    uint64_t seed = instance_seed(cell, inst);
    switch (cfg.experiment) {
    case ExperimentKind::cost_vs_ratio_controlled: {
      set_cost_cols(row, cost_of(instance, 1, seed, false, false, nullptr,
                                 cfg.runs_per_instance));
      break;
    }
    case ExperimentKind::nsolutions: {
      uint64_t count = 0;
      try {
        count = count_solutions(instance, solver_budget());
      } catch (const BudgetExhausted &) {
        row.set("flag", "count_budget_exhausted");
        cp.record(row);
        return;
      }
      row.set("nsolutions", fmt(count));
      set_cost_cols(row, cost_of(instance, 1, seed, false, false, nullptr,
                                 cfg.runs_per_instance));
      break;
    }
    case ExperimentKind::search_behavior: {
      SolutionSet sols =
          enumerate_solutions(instance, cfg.solution_cap, solver_budget());
      row.set("nsolutions_found", fmt(static_cast<uint64_t>(sols.size())));
      row.set("solutions_truncated", sols.complete() ? "0" : "1");
      const SolutionSet *ptr = sols.complete() ? &sols : nullptr;
      InstanceCostStats stats = cost_of(instance, 1, seed, true, false, ptr,
                                        cfg.runs_per_instance);
      set_cost_cols(row, stats);
      row.set("median_f5", fmt(stats.median_f5));
      row.set("mean_f5", fmt(stats.mean_f5));
      row.set("mean_hdns_f5", fmt(stats.mean_hdns_f5));
      break;
    }
    case ExperimentKind::robustness_vs_ratio: {
      set_robustness_cols(row, instance, seed);
      break;
    }
    case ExperimentKind::robustness_correlation: {
      set_cost_cols(row, cost_of(instance, 1, seed, false, false, nullptr,
                                 cfg.runs_per_instance));
      set_robustness_cols(row, instance, seed);
      break;
    }
    default:
      break;
    }
    cp.record(row);
  }

  void record_interpolation_point(const CellSpec &cell, int inst,
                                  const std::string &procedure, int point,
                                  int requested, int actual,
                                  const CnfInstance &derived,
                                  uint64_t cost_seed_salt, uint64_t seed,
                                  bool robustness) {
    char suffix[48];
    std::snprintf(suffix, sizeof(suffix), "/%s/p%02d", procedure.c_str(),
                  point);
    Row row = base_row(cell, inst, unit_key(cell.index, inst) + suffix);
    row.set("procedure", procedure);
    row.set("m_r", fmt(requested));
    row.set("actual_removed", fmt(actual));
    row.set("m_after", fmt(derived.num_clauses()));
    row.set("hash", fmt(derived.content_hash()));
    set_cost_cols(row, cost_of(derived, cost_seed_salt, seed, false, false,
                               nullptr, cfg.runs_per_instance));
    if (robustness)
      set_robustness_cols(row, derived, derive_seed(seed, cost_seed_salt, 2));
    cp.record(row);
  }

  void unit_bms_interpolation(const CellSpec &cell, int inst) {
    std::string key = unit_key(cell.index, inst);
    Row row = base_row(cell, inst, key);
    CnfInstance instance;
    if (!generate(cell, inst, row, instance, nullptr))
      return;
    uint64_t seed = instance_seed(cell, inst);

    Rng bms_rng(derive_seed(seed, 3));
    BmsResult bms = find_bms(instance, bms_rng, solver_budget());
    row.set("bms_size", fmt(bms.sub_instance.num_clauses()));
    row.set("bb_size", fmt(bms.backbone.size()));
    cp.record(row);

    json backbone_json = json::array();
    for (Lit l : bms.backbone.literals())
      backbone_json.push_back(l.dimacs());
    auto removed_of = [&](const std::vector<int> &kept) {
      std::vector<uint8_t> in(static_cast<size_t>(instance.num_clauses()), 0);
      for (int k : kept)
        in[static_cast<size_t>(k)] = 1;
      std::vector<int> removed;
      for (int k = 0; k < instance.num_clauses(); ++k)
        if (!in[static_cast<size_t>(k)])
          removed.push_back(k);
      return removed;
    };
    export_instance(instance, {{"role", "parent"},
                               {"seed", seed},
                               {"backbone", backbone_json}});
    {
      json side = {{"role", "bms"},
                   {"parent_hash", fmt(instance.content_hash())},
                   {"kept_parent_indices", bms.parent_indices},
                   {"removed_parent_indices", removed_of(bms.parent_indices)},
                   {"backbone", backbone_json},
                   {"seed", seed},
                   {"removal_seed", derive_seed(seed, 3)}};
      export_instance(bms.sub_instance, side);
    }

    int removable = instance.num_clauses() - bms.sub_instance.num_clauses();
    for (size_t p = 0; p < cfg.removal_schedule.size(); ++p) {
      int requested = cfg.removal_schedule[p];
      int actual = std::min(requested, removable);
      Rng rng(derive_seed(seed, 10, p));
      RemovedInstance derived =
          preserve_backbone_removal(instance, bms, actual, rng);
      json side = {{"role", "preserve-backbone"},
                   {"parent_hash", fmt(instance.content_hash())},
                   {"kept_parent_indices", derived.parent_index},
                   {"removed_parent_indices", removed_of(derived.parent_index)},
                   {"backbone", backbone_json},
                   {"seed", seed},
                   {"removal_seed", derive_seed(seed, 10, p)}};
      export_instance(derived.instance, side);
      record_interpolation_point(cell, inst, "preserve-backbone",
                                 static_cast<int>(p), requested, actual,
                                 derived.instance, 20 + p, seed,
                                 cfg.interpolation_robustness);
    }
    record_interpolation_point(cell, inst, "bms",
                               static_cast<int>(cfg.removal_schedule.size()),
                               removable, removable, bms.sub_instance, 40,
                               seed, cfg.interpolation_robustness);
    if (cfg.interpolation_random_control) {
      for (size_t p = 0; p < cfg.removal_schedule.size(); ++p) {
        int requested =
            std::min(cfg.removal_schedule[p], instance.num_clauses());
        Rng rng(derive_seed(seed, 11, p));
        RemovedInstance derived = random_removal(instance, requested, rng);
        record_interpolation_point(cell, inst, "random", static_cast<int>(p),
                                   requested, requested, derived.instance,
                                   50 + p, seed, false);
      }
    }
    if (cfg.interpolation_reduce_control) {
      for (size_t p = 0; p < cfg.removal_schedule.size(); ++p) {
        int requested = cfg.removal_schedule[p];
        Rng rng(derive_seed(seed, 12, p));
        ReduceBackboneResult derived = reduce_backbone_removal(
            instance, requested, rng, solver_budget());
        record_interpolation_point(cell, inst, "reduce-backbone",
                                   static_cast<int>(p), requested,
                                   derived.removals, derived.instance, 60 + p,
                                   seed, false);
      }
    }
  }

  void unit_uf_cohort(const CellSpec &cell, int inst) {
    Row row = base_row(cell, inst, "p1/" + unit_key(cell.index, inst));
    CnfInstance instance;
    if (!generate(cell, inst, row, instance, nullptr))
      return;
    set_cost_cols(row, cost_of(instance, 1, instance_seed(cell, inst), false,
                               false, nullptr, cfg.runs_per_instance));
    cp.record(row);
  }

  void unit_uf_selected(const CellSpec &cell, int inst, int pct) {
    std::string key = "p2/" + unit_key(cell.index, inst);
    Row row = base_row(cell, inst, key);
    row.set("percentile", fmt(pct));
    CnfInstance instance;
    if (!generate(cell, inst, row, instance, nullptr))
      return;
    uint64_t seed = instance_seed(cell, inst);

    std::vector<int> bc;
    Backbone backbone;
    try {
      backbone = compute_backbone(instance, solver_budget());
      bc = backbone_contribution(instance, solver_budget());
    } catch (const BudgetExhausted &) {
      row.set("flag", "bc_budget_exhausted");
      cp.record(row);
      return;
    }
    InstanceCostStats stats =
        cost_of(instance, 4, seed, false, true, nullptr, cfg.uf_runs);
    row.set("bb_size", fmt(backbone.size()));
    set_cost_cols(row, stats);

    const std::vector<double> &uf = stats.uf;
    std::vector<double> bc_d(bc.begin(), bc.end());
    auto mean_of = [](const std::vector<double> &v) {
      return std::accumulate(v.begin(), v.end(), 0.0) /
             static_cast<double>(v.size());
    };
    auto sd_of = [&](const std::vector<double> &v) {
      double mu = mean_of(v), ss = 0;
      for (double x : v)
        ss += (x - mu) * (x - mu);
      return v.size() > 1 ? std::sqrt(ss / (static_cast<double>(v.size()) - 1))
                          : 0.0;
    };
    // Top 10% = value >= 90th percentile, ties included. When more than 90%
    // of the values tie at the minimum (common for bc, which is zero on most
    // clauses), that rule would select every clause; fall back to the
    // strictly-above-minimum ones, i.e. the clauses that are critical at all.
    auto top_set = [&](const std::vector<double> &by) {
      double thresh = percentile(by, 90.0);
      double lo = *std::min_element(by.begin(), by.end());
      std::vector<size_t> idx;
      for (size_t i = 0; i < by.size(); ++i)
        if (thresh > lo ? by[i] >= thresh : by[i] > lo)
          idx.push_back(i);
      return idx;
    };
    auto subset = [](const std::vector<double> &v,
                     const std::vector<size_t> &idx) {
      std::vector<double> out;
      out.reserve(idx.size());
      for (size_t i : idx)
        out.push_back(v[i]);
      return out;
    };
    std::vector<double> uf_top_bc = subset(uf, top_set(bc_d));
    std::vector<double> bc_top_uf = subset(bc_d, top_set(uf));
    row.set("uf_mean_all", fmt(mean_of(uf)));
    row.set("uf_sd_all", fmt(sd_of(uf)));
    row.set("bc_mean_all", fmt(mean_of(bc_d)));
    row.set("bc_sd_all", fmt(sd_of(bc_d)));
    if (!uf_top_bc.empty()) { // empty only when bc is identically constant
      row.set("uf_mean_top_bc", fmt(mean_of(uf_top_bc)));
      row.set("uf_sd_top_bc", fmt(sd_of(uf_top_bc)));
    }
    if (!bc_top_uf.empty()) {
      row.set("bc_mean_top_uf", fmt(mean_of(bc_top_uf)));
      row.set("bc_sd_top_uf", fmt(sd_of(bc_top_uf)));
    }
    cp.record(row);

    for (int c = 0; c < instance.num_clauses(); ++c) {
      char suffix[24];
      std::snprintf(suffix, sizeof(suffix), "/cl%05d", c);
      Row crow;
      crow.key = key + suffix;
      crow.set("cell", fmt(cell.index));
      crow.set("instance", fmt(inst));
      crow.set("clause", fmt(c));
      crow.set("uf", fmt(uf[static_cast<size_t>(c)]));
      crow.set("bc", fmt(bc[static_cast<size_t>(c)]));
      cp.record(crow);
    }
  }
};

// --- summaries -------------------------------------------------------------

std::vector<const Row *> rows_with_prefix(const std::map<std::string, Row> &m,
                                          const std::string &prefix,
                                          bool unflagged_only) {
  std::vector<const Row *> out;
  for (auto &[key, row] : m) {
    if (key.size() < prefix.size() || key.compare(0, prefix.size(), prefix))
      continue;
    if (key.find("/~") != std::string::npos)
      continue;
    if (unflagged_only && !row.get("flag").empty())
      continue;
    out.push_back(&row);
  }
  return out;
}

std::vector<double> column(const std::vector<const Row *> &rows,
                           const std::string &col) {
  std::vector<double> v;
  for (const Row *r : rows) {
    double x = r->num(col);
    if (!std::isnan(x))
      v.push_back(x);
  }
  return v;
}

} // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
  case ExperimentKind::cost_peak:
    return "cost-peak";
  case ExperimentKind::cost_vs_ratio_controlled:
    return "cost-vs-ratio-controlled";
  case ExperimentKind::nsolutions:
    return "nsolutions";
  case ExperimentKind::search_behavior:
    return "search-behavior";
  case ExperimentKind::robustness_vs_ratio:
    return "robustness-vs-ratio";
  case ExperimentKind::robustness_correlation:
    return "robustness-correlation";
  case ExperimentKind::bms_interpolation:
    return "bms-interpolation";
  case ExperimentKind::uf_bc:
    return "uf-bc";
  }
  return "unknown";
}

std::optional<ExperimentKind> experiment_from_string(std::string_view name) {
  for (ExperimentKind k :
       {ExperimentKind::cost_peak, ExperimentKind::cost_vs_ratio_controlled,
        ExperimentKind::nsolutions, ExperimentKind::search_behavior,
        ExperimentKind::robustness_vs_ratio,
        ExperimentKind::robustness_correlation,
        ExperimentKind::bms_interpolation, ExperimentKind::uf_bc})
    if (to_string(k) == name)
      return k;
  return std::nullopt;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  const std::vector<double> transition_grid = {4.03, 4.11, 4.18, 4.23,
                                               4.29, 4.35, 4.41, 4.49};
  switch (kind) {
  case ExperimentKind::cost_peak:
    for (int i = 0; i <= 14; ++i)
      cfg.ratios.push_back(3.6 + 0.1 * i);
    cfg.instances_per_cell = 200;
    break;
  case ExperimentKind::cost_vs_ratio_controlled:
  case ExperimentKind::nsolutions:
  case ExperimentKind::search_behavior:
  case ExperimentKind::robustness_vs_ratio:
    cfg.ratios = transition_grid;
    cfg.backbone_fractions = {0.1, 0.5, 0.9};
    cfg.instances_per_cell = 100;
    break;
  case ExperimentKind::robustness_correlation:
    cfg.ratios = {4.3};
    cfg.backbone_fractions = {0.1, 0.5, 0.9};
    cfg.instances_per_cell = 200;
    break;
  case ExperimentKind::bms_interpolation:
    cfg.ratios = {4.3};
    cfg.instances_per_cell = 50;
    break;
  case ExperimentKind::uf_bc:
    cfg.ratios = {4.3};
    cfg.instances_per_cell = 200;
    break;
  }
  return cfg;
}

std::string serialize_config(const ExperimentConfig &c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = to_string(c.experiment);
  j["n"] = c.n;
  j["ratios"] = c.ratios;
  j["instances_per_cell"] = c.instances_per_cell;
  j["runs_per_instance"] = c.runs_per_instance;
  j["backbone_fractions"] = c.backbone_fractions;
  j["backbone_tolerance"] = c.backbone_tolerance;
  j["noise_p"] = c.noise_p;
  j["max_flips"] = c.max_flips;
  j["removal_schedule"] = c.removal_schedule;
  j["interpolation_robustness"] = c.interpolation_robustness;
  j["interpolation_random_control"] = c.interpolation_random_control;
  j["interpolation_reduce_control"] = c.interpolation_reduce_control;
  j["percentile_selection"] = c.percentile_selection;
  j["uf_runs"] = c.uf_runs;
  j["root_seed"] = c.root_seed;
  j["workers"] = c.workers;
  j["out_dir"] = c.out_dir;
  j["gen_budget"] = c.gen_budget;
  j["solution_cap"] = c.solution_cap;
  j["solver_max_decisions"] = c.solver_max_decisions;
  j["min_trials"] = c.min_trials;
  j["rel_se"] = c.rel_se;
  j["max_trials"] = c.max_trials;
  return j.dump(2);
}

ExperimentConfig parse_config_json(const std::string &text) {
  json j = json::parse(text);
  ExperimentConfig c;
  auto kind = experiment_from_string(j.at("experiment").get<std::string>());
  if (!kind)
    throw Error("unknown experiment kind in config");
  c.experiment = *kind;
  c.n = j.at("n").get<int>();
  c.ratios = j.at("ratios").get<std::vector<double>>();
  c.instances_per_cell = j.at("instances_per_cell").get<int>();
  c.runs_per_instance = j.at("runs_per_instance").get<int>();
  c.backbone_fractions = j.at("backbone_fractions").get<std::vector<double>>();
  c.backbone_tolerance = j.at("backbone_tolerance").get<int>();
  c.noise_p = j.at("noise_p").get<double>();
  c.max_flips = j.at("max_flips").get<uint64_t>();
  c.removal_schedule = j.at("removal_schedule").get<std::vector<int>>();
  c.interpolation_robustness = j.at("interpolation_robustness").get<bool>();
  c.interpolation_random_control =
      j.at("interpolation_random_control").get<bool>();
  c.interpolation_reduce_control =
      j.at("interpolation_reduce_control").get<bool>();
  c.percentile_selection = j.at("percentile_selection").get<std::vector<int>>();
  c.uf_runs = j.at("uf_runs").get<int>();
  c.root_seed = j.at("root_seed").get<uint64_t>();
  c.workers = j.at("workers").get<int>();
  c.out_dir = j.at("out_dir").get<std::string>();
  c.gen_budget = j.at("gen_budget").get<int>();
  c.solution_cap = j.at("solution_cap").get<uint64_t>();
  c.solver_max_decisions = j.at("solver_max_decisions").get<uint64_t>();
  c.min_trials = j.at("min_trials").get<int>();
  c.rel_se = j.at("rel_se").get<double>();
  c.max_trials = j.at("max_trials").get<int>();
  return c;
}

namespace {

void summarize(const ExperimentConfig &cfg, const std::vector<CellSpec> &cells,
               const std::map<std::string, Row> &rows,
               std::vector<Row> &summary) {
  for (const CellSpec &cell : cells) {
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "c%03d/", cell.index);
    std::string p1_prefix = std::string("p1/") + prefix;
    auto cell_rows = rows_with_prefix(
        rows, cfg.experiment == ExperimentKind::uf_bc ? p1_prefix : prefix,
        true);
    if (cell_rows.empty())
      continue;
    Row base;
    base.set("cell", fmt(cell.index));
    base.set("ratio", fmt(cell.ratio));
    base.set("n", fmt(cfg.n));
    base.set("m", fmt(cell.m));
    if (cell.bb_target >= 0)
      base.set("bb_target", fmt(cell.bb_target));

    switch (cfg.experiment) {
    case ExperimentKind::cost_peak: {
      std::vector<double> costs = column(cell_rows, "cost");
      if (costs.empty())
        break;
      for (double q : {10.0, 25.0, 50.0, 75.0, 90.0}) {
        Row r = base;
        char key[48];
        std::snprintf(key, sizeof(key), "%sq%05.1f", prefix, q);
        r.key = key;
        r.set("percentile", fmt(q));
        r.set("cost", fmt(percentile(costs, q)));
        summary.push_back(std::move(r));
      }
      break;
    }
    case ExperimentKind::cost_vs_ratio_controlled: {
      std::vector<double> costs = column(cell_rows, "cost");
      if (costs.empty())
        break;
      Row r = base;
      r.key = prefix;
      r.set("instances", fmt(static_cast<int>(costs.size())));
      r.set("median_cost", fmt(median(costs)));
      r.set("cost_q25", fmt(percentile(costs, 25.0)));
      r.set("cost_q75", fmt(percentile(costs, 75.0)));
      summary.push_back(std::move(r));
      break;
    }
    case ExperimentKind::nsolutions: {
      PairedSample s;
      std::vector<double> counts;
      for (const Row *row : cell_rows) {
        double nsol = row->num("nsolutions");
        double cost = row->num("cost");
        if (std::isnan(nsol) || std::isnan(cost) || nsol <= 0 || cost <= 0)
          continue;
        counts.push_back(nsol);
        s.x.push_back(std::log10(nsol));
        s.y.push_back(std::log10(cost));
      }
      if (counts.empty())
        break;
      Row r = base;
      r.key = prefix;
      r.set("instances", fmt(static_cast<int>(counts.size())));
      r.set("median_nsolutions", fmt(median(counts)));
      r.set("nsolutions_q25", fmt(percentile(counts, 25.0)));
      r.set("nsolutions_q75", fmt(percentile(counts, 75.0)));
      if (s.size() >= 2) {
        try {
          LinearFit fit = ols_fit(s);
          r.set("lsr_intercept", fmt(fit.intercept));
          r.set("lsr_gradient", fmt(fit.gradient));
          r.set("r", fmt(pearson_r(s)));
          r.set("rank_corr", fmt(spearman_rank(s)));
        } catch (const std::invalid_argument &) {
        }
      }
      summary.push_back(std::move(r));
      break;
    }
    case ExperimentKind::search_behavior: {
      std::vector<double> f5 = column(cell_rows, "median_f5");
      std::vector<double> hdns5 = column(cell_rows, "mean_hdns_f5");
      PairedSample s;
      for (const Row *row : cell_rows) {
        double h = row->num("mean_hdns_f5");
        double cost = row->num("cost");
        if (std::isnan(h) || std::isnan(cost) || cost <= 0)
          continue;
        s.x.push_back(h);
        s.y.push_back(std::log10(cost));
      }
      Row r = base;
      r.key = prefix;
      r.set("instances", fmt(static_cast<int>(cell_rows.size())));
      if (!f5.empty())
        r.set("median_f5", fmt(median(f5)));
      if (!hdns5.empty()) {
        r.set("median_mean_hdns_f5", fmt(median(hdns5)));
        r.set("hdns_q25", fmt(percentile(hdns5, 25.0)));
        r.set("hdns_q75", fmt(percentile(hdns5, 75.0)));
      }
      if (s.size() >= 2) {
        try {
          LinearFit fit = ols_fit(s);
          r.set("lsr_intercept", fmt(fit.intercept));
          r.set("lsr_gradient", fmt(fit.gradient));
          r.set("r", fmt(pearson_r(s)));
        } catch (const std::invalid_argument &) {
        }
      }
      summary.push_back(std::move(r));
      break;
    }
    case ExperimentKind::robustness_vs_ratio: {
      std::vector<double> rob = column(cell_rows, "robustness");
      if (rob.empty())
        break;
      Row r = base;
      r.key = prefix;
      r.set("instances", fmt(static_cast<int>(rob.size())));
      r.set("median_robustness", fmt(median(rob)));
      r.set("robustness_q25", fmt(percentile(rob, 25.0)));
      r.set("robustness_q75", fmt(percentile(rob, 75.0)));
      summary.push_back(std::move(r));
      break;
    }
    case ExperimentKind::robustness_correlation: {
      PairedSample s;
      for (const Row *row : cell_rows) {
        double rob = row->num("robustness");
        double cost = row->num("cost");
        if (std::isnan(rob) || std::isnan(cost) || cost <= 0)
          continue;
        s.x.push_back(rob);
        s.y.push_back(std::log10(cost));
      }
      Row r = base;
      r.key = prefix;
      r.set("instances", fmt(static_cast<int>(s.size())));
      if (s.size() >= 3) {
        try {
          LinearFit fit = ols_fit(s);
          r.set("lsr_intercept", fmt(fit.intercept));
          r.set("lsr_gradient", fmt(fit.gradient));
          r.set("r", fmt(pearson_r(s)));
          r.set("rank_corr", fmt(spearman_rank(s)));
          Rng rng(derive_seed(cfg.root_seed, 0xabcdu,
                              static_cast<uint64_t>(cell.index)));
          RandomizationResult rand = randomization_test(s, 1000, rng);
          r.set("randomization_p", fmt(rand.p_two_sided));
          r.set("reject_999", rand.reject_999 ? "1" : "0");
          BootstrapCi ci = bootstrap_ci_r(s, 1000, rng);
          r.set("r_lo_95", fmt(ci.lo));
          r.set("r_hi_95", fmt(ci.hi));
        } catch (const std::invalid_argument &) {
        }
      }
      summary.push_back(std::move(r));
      break;
    }
    case ExperimentKind::bms_interpolation: {
      // One summary row per (procedure, point): Table-5-shaped percentiles.
      std::map<std::string, std::vector<const Row *>> groups;
      for (const Row *row : cell_rows) {
        std::string proc = row->get("procedure");
        if (proc.empty())
          continue; // per-instance base rows carry no point data
        size_t slash = row->key.rfind("/p");
        groups[proc + row->key.substr(slash)].push_back(row);
      }
      for (auto &[gk, grows] : groups) {
        std::vector<double> costs = column(grows, "cost");
        if (costs.empty())
          continue;
        Row r = base;
        r.key = prefix + gk;
        r.set("procedure", grows.front()->get("procedure"));
        r.set("m_r", grows.front()->get("m_r"));
        r.set("instances", fmt(static_cast<int>(costs.size())));
        r.set("cost_p10", fmt(percentile(costs, 10.0)));
        r.set("cost_median", fmt(median(costs)));
        r.set("cost_p90", fmt(percentile(costs, 90.0)));
        std::vector<double> rob = column(grows, "robustness");
        if (!rob.empty()) {
          r.set("robustness_p10", fmt(percentile(rob, 10.0)));
          r.set("robustness_median", fmt(median(rob)));
          r.set("robustness_p90", fmt(percentile(rob, 90.0)));
        }
        summary.push_back(std::move(r));
      }
      break;
    }
    case ExperimentKind::uf_bc: {
      auto selected = rows_with_prefix(rows, std::string("p2/") + prefix, true);
      for (const Row *row : selected) {
        if (!row->get("percentile").empty() && !row->get("uf_mean_all").empty()) {
          Row r = *row;
          r.key = prefix + std::string("sel/") + row->get("instance");
          summary.push_back(std::move(r));
        }
      }
      break;
    }
    }
  }
}

std::vector<std::string> instances_header(ExperimentKind kind) {
  std::vector<std::string> cols = {"experiment", "cell",     "ratio",
                                   "n",          "m",        "instance",
                                   "seed",       "attempts", "hash",
                                   "flag"};
  switch (kind) {
  case ExperimentKind::cost_peak:
    for (auto c : {"cost", "q25", "q75", "capped_runs"})
      cols.push_back(c);
    break;
  case ExperimentKind::cost_vs_ratio_controlled:
    for (auto c : {"bb_target", "bb_size", "cost", "q25", "q75", "capped_runs"})
      cols.push_back(c);
    break;
  case ExperimentKind::nsolutions:
    for (auto c :
         {"bb_target", "bb_size", "nsolutions", "cost", "q25", "q75"})
      cols.push_back(c);
    break;
  case ExperimentKind::search_behavior:
    for (auto c : {"bb_target", "bb_size", "nsolutions_found",
                   "solutions_truncated", "cost", "q25", "q75", "median_f5",
                   "mean_f5", "mean_hdns_f5"})
      cols.push_back(c);
    break;
  case ExperimentKind::robustness_vs_ratio:
    for (auto c : {"bb_target", "bb_size", "robustness", "rob_se",
                   "rob_trials", "rob_converged", "rob_flag"})
      cols.push_back(c);
    break;
  case ExperimentKind::robustness_correlation:
    for (auto c : {"bb_target", "bb_size", "cost", "q25", "q75", "robustness",
                   "rob_se", "rob_trials", "rob_converged", "rob_flag"})
      cols.push_back(c);
    break;
  case ExperimentKind::bms_interpolation:
    for (auto c : {"bb_size", "bms_size", "procedure", "m_r", "actual_removed",
                   "m_after", "cost", "q25", "q75", "robustness", "rob_se",
                   "rob_trials", "rob_converged", "rob_flag"})
      cols.push_back(c);
    break;
  case ExperimentKind::uf_bc:
    for (auto c :
         {"percentile", "bb_size", "cost", "q25", "q75", "uf_mean_all",
          "uf_sd_all", "uf_mean_top_bc", "uf_sd_top_bc", "bc_mean_all",
          "bc_sd_all", "bc_mean_top_uf", "bc_sd_top_uf"})
      cols.push_back(c);
    break;
  }
  return cols;
}

// Plotting happens out of process; each run ships a plain-text recipe naming
// the columns to plot against each other.
std::string plot_recipe(ExperimentKind kind) {
  switch (kind) {
  case ExperimentKind::cost_peak:
    return "summary.csv: for each percentile value, plot cost (y, log scale)"
           " against ratio (x). One line per percentile.\n";
  case ExperimentKind::cost_vs_ratio_controlled:
    return "summary.csv: plot median_cost (y, log scale) against ratio (x),"
           " one line per bb_target; error bars from cost_q25/cost_q75.\n";
  case ExperimentKind::nsolutions:
    return "summary.csv: plot median_nsolutions (y, log scale) against ratio"
           " (x) per bb_target; bars nsolutions_q25/q75.\n"
           "instances.csv: scatter log10(nsolutions) (x) vs log10(cost) (y)"
           " per cell; overlay the lsr fit from summary.csv.\n";
  case ExperimentKind::search_behavior:
    return "summary.csv: plot median_f5 and median_mean_hdns_f5 (y) against"
           " ratio (x) per bb_target; bars hdns_q25/q75.\n"
           "instances.csv: scatter mean_hdns_f5 (x) vs log10(cost) (y);"
           " overlay the lsr fit from summary.csv.\n";
  case ExperimentKind::robustness_vs_ratio:
    return "summary.csv: plot median_robustness (y) against ratio (x), one"
           " line per bb_target; bars robustness_q25/q75.\n";
  case ExperimentKind::robustness_correlation:
    return "instances.csv: scatter robustness (x) vs log10(cost) (y) per"
           " cell; overlay lsr fit; annotate r, CI and reject_999 from"
           " summary.csv.\n";
  case ExperimentKind::bms_interpolation:
    return "summary.csv: per procedure, plot cost_median (y, log scale)"
           " against m_r (x); repeat for robustness_median.\n";
  case ExperimentKind::uf_bc:
    return "clauses.csv: scatter bc (x) vs uf (y) for a chosen instance.\n"
           "summary.csv: compare uf_mean_top_bc with uf_mean_all and"
           " bc_mean_top_uf with bc_mean_all per percentile instance.\n";
  }
  return "";
}

std::vector<std::string> summary_header(ExperimentKind kind) {
  switch (kind) {
  case ExperimentKind::cost_peak:
    return {"cell", "ratio", "n", "m", "percentile", "cost"};
  case ExperimentKind::cost_vs_ratio_controlled:
    return {"cell", "ratio", "n", "m", "bb_target", "instances", "median_cost",
            "cost_q25", "cost_q75"};
  case ExperimentKind::nsolutions:
    return {"cell", "ratio", "n", "m", "bb_target", "instances",
            "median_nsolutions", "nsolutions_q25", "nsolutions_q75",
            "lsr_intercept", "lsr_gradient", "r", "rank_corr"};
  case ExperimentKind::search_behavior:
    return {"cell", "ratio", "n", "m", "bb_target", "instances", "median_f5",
            "median_mean_hdns_f5", "hdns_q25", "hdns_q75", "lsr_intercept",
            "lsr_gradient", "r"};
  case ExperimentKind::robustness_vs_ratio:
    return {"cell", "ratio", "n", "m", "bb_target", "instances",
            "median_robustness", "robustness_q25", "robustness_q75"};
  case ExperimentKind::robustness_correlation:
    return {"cell", "ratio", "n", "m", "bb_target", "instances",
            "lsr_intercept", "lsr_gradient", "r", "r_lo_95", "r_hi_95",
            "rank_corr", "randomization_p", "reject_999"};
  case ExperimentKind::bms_interpolation:
    return {"cell", "ratio", "n", "m", "procedure", "m_r", "instances",
            "cost_p10", "cost_median", "cost_p90", "robustness_p10",
            "robustness_median", "robustness_p90"};
  case ExperimentKind::uf_bc:
    return {"cell", "ratio", "n", "m", "instance", "percentile", "bb_size",
            "cost", "uf_mean_all", "uf_sd_all", "uf_mean_top_bc",
            "uf_sd_top_bc", "bc_mean_all", "bc_sd_all", "bc_mean_top_uf",
            "bc_sd_top_uf"};
  }
  return {};
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig &cfg) {
  if (cfg.ratios.empty())
    throw std::invalid_argument("run_experiment: empty ratio grid");
  if (uses_backbone_control(cfg.experiment) && cfg.backbone_fractions.empty())
    throw std::invalid_argument(
        "run_experiment: experiment needs backbone_fractions");
  fs::create_directories(cfg.out_dir);
  fs::path out_dir(cfg.out_dir);

  // Manifest guard: resuming under a different config is an error.
  std::string manifest = serialize_config(cfg);
  fs::path manifest_path = out_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    std::stringstream buf;
    buf << in.rdbuf();
    if (buf.str() != manifest)
      throw Error("run_experiment: out_dir holds a different manifest; "
                  "refusing to mix configurations");
  } else {
    std::ofstream out(manifest_path);
    out << manifest;
  }

  Checkpoint cp(out_dir / "checkpoint.jsonl");
  Runner runner(cfg, cp);
  ExperimentResult result;
  result.manifest_path = manifest_path.string();

  long long projected = static_cast<long long>(runner.cells.size()) *
                        cfg.instances_per_cell * cfg.runs_per_instance;
  if (projected > 10'000'000LL)
    std::fprintf(stderr,
                 "satkit: warning: projected %lld wsat runs exceeds desk "
                 "scale; consider fewer instances_per_cell or "
                 "runs_per_instance\n",
                 projected);

  struct Unit {
    int cell;
    int inst;
  };
  std::vector<Unit> units;
  for (const CellSpec &cell : runner.cells)
    for (int i = 0; i < cfg.instances_per_cell; ++i)
      units.push_back({cell.index, i});
  result.units_total = static_cast<int>(units.size());

  std::atomic<int> skipped{0};
  auto run_units = [&](const std::string &phase_prefix,
                       const std::function<void(const CellSpec &, int)> &fn) {
    parallel_for(cfg.workers, static_cast<int>(units.size()), [&](int u) {
      const CellSpec &cell = runner.cells[static_cast<size_t>(units[static_cast<size_t>(u)].cell)];
      int inst = units[static_cast<size_t>(u)].inst;
      std::string marker =
          phase_prefix + unit_key(cell.index, inst) + "/~";
      if (cp.contains(marker)) {
        skipped.fetch_add(1);
        return;
      }
      fn(cell, inst);
      Row done;
      done.key = marker;
      cp.record(done);
    });
  };

  switch (cfg.experiment) {
  case ExperimentKind::cost_peak:
    run_units("", [&](const CellSpec &c, int i) { runner.unit_cost_peak(c, i); });
    break;
  case ExperimentKind::cost_vs_ratio_controlled:
  case ExperimentKind::nsolutions:
  case ExperimentKind::search_behavior:
  case ExperimentKind::robustness_vs_ratio:
  case ExperimentKind::robustness_correlation:
    run_units("", [&](const CellSpec &c, int i) { runner.unit_controlled(c, i); });
    break;
  case ExperimentKind::bms_interpolation:
    run_units("",
              [&](const CellSpec &c, int i) { runner.unit_bms_interpolation(c, i); });
    break;
  case ExperimentKind::uf_bc: {
    run_units("p1/", [&](const CellSpec &c, int i) { runner.unit_uf_cohort(c, i); });
    // Deterministic percentile selection from the finished cohort.
    auto rows = cp.snapshot();
    std::vector<Unit> selected;
    std::vector<int> selected_percentile;
    for (const CellSpec &cell : runner.cells) {
      char prefix[32];
      std::snprintf(prefix, sizeof(prefix), "p1/c%03d/", cell.index);
      auto cell_rows = rows_with_prefix(rows, prefix, true);
      std::vector<std::pair<double, int>> by_cost;
      for (const Row *r : cell_rows) {
        double cost = r->num("cost");
        if (!std::isnan(cost))
          by_cost.emplace_back(cost, static_cast<int>(r->num("instance")));
      }
      std::sort(by_cost.begin(), by_cost.end());
      int N = static_cast<int>(by_cost.size());
      if (N == 0)
        continue;
      for (int p : cfg.percentile_selection) {
        int rank = std::clamp(
            static_cast<int>(std::llround(p / 100.0 * N)), 1, N);
        Unit u{cell.index, by_cost[static_cast<size_t>(rank - 1)].second};
        bool dup = false;
        for (size_t s = 0; s < selected.size(); ++s)
          if (selected[s].cell == u.cell && selected[s].inst == u.inst)
            dup = true;
        if (!dup) {
          selected.push_back(u);
          selected_percentile.push_back(p);
        }
      }
    }
    std::vector<Unit> save_units = units;
    units = selected;
    parallel_for(cfg.workers, static_cast<int>(units.size()), [&](int u) {
      const CellSpec &cell = runner.cells[static_cast<size_t>(units[static_cast<size_t>(u)].cell)];
      int inst = units[static_cast<size_t>(u)].inst;
      std::string marker = "p2/" + unit_key(cell.index, inst) + "/~";
      if (cp.contains(marker)) {
        skipped.fetch_add(1);
        return;
      }
      runner.unit_uf_selected(cell, inst, selected_percentile[static_cast<size_t>(u)]);
      Row done;
      done.key = marker;
      cp.record(done);
    });
    units = save_units;
    break;
  }
  }
  result.units_skipped = skipped.load();

  // Assemble CSVs from the full keyed row set: deterministic order/content.
  auto rows = cp.snapshot();
  std::vector<const Row *> instance_rows;
  for (auto &[key, row] : rows) {
    if (key.find("/~") != std::string::npos)
      continue;
    if (cfg.experiment == ExperimentKind::uf_bc && key.find("/cl") != std::string::npos)
      continue;
    instance_rows.push_back(&row);
    if (!row.get("flag").empty())
      result.units_flagged++;
  }
  fs::path instances_csv = out_dir / "instances.csv";
  write_csv(instances_csv, instances_header(cfg.experiment), instance_rows);
  result.csv_paths.push_back(instances_csv.string());

  if (cfg.experiment == ExperimentKind::uf_bc) {
    std::vector<const Row *> clause_rows;
    for (auto &[key, row] : rows)
      if (key.find("/cl") != std::string::npos)
        clause_rows.push_back(&row);
    fs::path clauses_csv = out_dir / "clauses.csv";
    write_csv(clauses_csv, {"cell", "instance", "clause", "uf", "bc"},
              clause_rows);
    result.csv_paths.push_back(clauses_csv.string());
  }

  std::vector<Row> summary;
  summarize(cfg, runner.cells, rows, summary);
  std::vector<const Row *> summary_ptrs;
  std::sort(summary.begin(), summary.end(),
            [](const Row &a, const Row &b) { return a.key < b.key; });
  for (const Row &r : summary)
    summary_ptrs.push_back(&r);
  fs::path summary_csv = out_dir / "summary.csv";
  write_csv(summary_csv, summary_header(cfg.experiment), summary_ptrs);
  result.csv_paths.push_back(summary_csv.string());

  std::ofstream recipe(out_dir / "plot_recipe.txt");
  recipe << plot_recipe(cfg.experiment);
  return result;
}

} // namespace satkit
