// satkit: WSAT/backbone experimentation toolkit command line.
//
// Exit codes: 0 ok, 1 usage error, 2 input error, 3 budget exhausted.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "satkit/backbone_lab.hpp"
#include "satkit/cnf.hpp"
#include "satkit/dpll.hpp"
#include "satkit/errors.hpp"
#include "satkit/experiment.hpp"
#include "satkit/generator.hpp"
#include "satkit/rng.hpp"
#include "satkit/stats.hpp"
#include "satkit/wsat.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace satkit;

namespace {

CnfInstance read_instance(const std::string &path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return parse_dimacs(buf.str());
  }
  return parse_dimacs_file(path);
}

int default_workers() {
  if (const char *env = std::getenv("SATKIT_WORKERS"))
    return std::max(1, std::atoi(env));
  return 1;
}

struct CommonOpts {
  std::string file = "-";
  uint64_t seed = 1;
  std::string format = "csv";
  std::string out;
  uint64_t max_decisions = 100'000'000;
};

void add_common(CLI::App *cmd, CommonOpts &o, bool wants_file = true) {
  if (wants_file)
    cmd->add_option("file", o.file, "DIMACS CNF file ('-' for stdin)");
  cmd->add_option("--seed", o.seed, "root RNG seed");
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", o.out, "write results here instead of stdout");
  cmd->add_option("--max-decisions", o.max_decisions,
                  "solver decision budget per call");
}

void redirect_stdout(const std::string &out) {
  if (!out.empty() && !std::freopen(out.c_str(), "w", stdout))
    throw Error("cannot write '" + out + "'");
}

// ---- gen -------------------------------------------------------------------

struct GenOpts {
  int n = 50;
  int m = -1;
  double ratio = 4.3;
  int k = 3;
  int count = 1;
  uint64_t seed = 1;
  std::string out_dir = ".";
  bool satisfiable = false;
  int backbone_size = -1;
  int tolerance = 0;
  int budget = 200000;
  bool skip_analysis = false;
};

int run_gen(const GenOpts &o) {
  int m = o.m >= 0 ? o.m : static_cast<int>(std::llround(o.ratio * o.n));
  fs::create_directories(o.out_dir);
  std::ofstream manifest(fs::path(o.out_dir) / "manifest.csv");
  manifest << "index,file,seed,n,m,k,satisfiable,backbone_size,attempts\n";
  for (int i = 0; i < o.count; ++i) {
    uint64_t seed = derive_seed(o.seed, static_cast<uint64_t>(i));
    GenSpec spec{o.n, m, o.k, seed};
    Rng rng(seed);
    SampleReport rep{1};
    CnfInstance inst;
    Backbone backbone;
    bool have_backbone = false;
    std::string sat_status;
    if (o.backbone_size >= 0) {
      inst = sample_with_backbone_size(spec, o.backbone_size, rng, o.budget,
                                       &rep, o.tolerance, &backbone);
      have_backbone = true;
      sat_status = "1";
    } else if (o.satisfiable) {
      inst = sample_satisfiable(spec, rng, o.budget, &rep);
      sat_status = "1";
    } else {
      inst = generate_random_ksat(spec, rng);
    }
    if (!o.skip_analysis && sat_status.empty())
      sat_status = solve(inst).satisfiable ? "1" : "0";
    if (!o.skip_analysis && sat_status == "1" && !have_backbone) {
      backbone = compute_backbone(inst);
      have_backbone = true;
    }
    char name[32];
    std::snprintf(name, sizeof(name), "inst_%05d.cnf", i);
    write_dimacs_file(inst, (fs::path(o.out_dir) / name).string());
    manifest << i << "," << name << "," << seed << "," << o.n << "," << m
             << "," << o.k << "," << sat_status << ","
             << (have_backbone ? std::to_string(backbone.size()) : "") << ","
             << rep.attempts << "\n";
  }
  std::printf("wrote %d instance(s) under %s\n", o.count, o.out_dir.c_str());
  return 0;
}

// ---- stats -----------------------------------------------------------------

struct StatsOpts {
  std::string file = "-";
  std::string op = "pearson";
  std::string x_col = "x";
  std::string y_col = "y";
  int k = 1000;
  int b = 1000;
  uint64_t seed = 1;
};

PairedSample read_paired_csv(const std::string &path, const std::string &xc,
                             const std::string &yc) {
  std::string text;
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    text = buf.str();
  } else {
    std::ifstream in(path);
    if (!in)
      throw Error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line))
    throw Error("stats: empty input");
  auto split = [](const std::string &s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  std::vector<std::string> header = split(line);
  int xi = -1, yi = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == xc)
      xi = static_cast<int>(i);
    if (header[i] == yc)
      yi = static_cast<int>(i);
  }
  if (xi < 0 || yi < 0)
    throw Error("stats: columns '" + xc + "'/'" + yc + "' not found");
  PairedSample s;
  while (std::getline(lines, line)) {
    if (line.empty())
      continue;
    std::vector<std::string> cells = split(line);
    if (static_cast<int>(cells.size()) <= std::max(xi, yi))
      continue;
    try {
      double x = std::stod(cells[static_cast<size_t>(xi)]);
      double y = std::stod(cells[static_cast<size_t>(yi)]);
      s.x.push_back(x);
      s.y.push_back(y);
    } catch (...) {
      continue; // non-numeric row
    }
  }
  return s;
}

int run_stats(const StatsOpts &o) {
  PairedSample s = read_paired_csv(o.file, o.x_col, o.y_col);
  Rng rng(o.seed);
  json out;
  out["n"] = s.size();
  if (o.op == "pearson") {
    out["r"] = pearson_r(s);
  } else if (o.op == "spearman") {
    out["rank_corr"] = spearman_rank(s);
  } else if (o.op == "ols") {
    LinearFit fit = ols_fit(s);
    out["intercept"] = fit.intercept;
    out["gradient"] = fit.gradient;
  } else if (o.op == "randomization") {
    RandomizationResult r = randomization_test(s, o.k, rng);
    out["r"] = r.r_observed;
    out["p_two_sided"] = r.p_two_sided;
    out["reject_999"] = r.reject_999;
    out["k"] = o.k;
  } else if (o.op == "bootstrap") {
    BootstrapCi ci = bootstrap_ci_r(s, o.b, rng);
    out["r"] = pearson_r(s);
    out["r_lo_95"] = ci.lo;
    out["r_hi_95"] = ci.hi;
    out["b"] = o.b;
  } else {
    throw Error("stats: unknown op '" + o.op + "'");
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---- literal helpers ---------------------------------------------------

void print_backbone(const Backbone &b) {
  for (Lit l : b.literals())
    std::printf("%d : %+d\n", l.var(), l.dimacs());
  std::printf("size %d\n", b.size());
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"satkit: WSAT local-search and backbone experimentation kit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file mirroring the flags");

  // gen
  GenOpts gen;
  CLI::App *gen_cmd = app.add_subcommand("gen", "generate random k-SAT instances");
  gen_cmd->add_option("--n", gen.n, "variable count");
  gen_cmd->add_option("--m", gen.m, "clause count (overrides --ratio)");
  gen_cmd->add_option("--ratio", gen.ratio, "clause/variable ratio");
  gen_cmd->add_option("--k", gen.k, "literals per clause");
  gen_cmd->add_option("--count", gen.count, "instances to generate");
  gen_cmd->add_option("--seed", gen.seed, "root seed");
  gen_cmd->add_option("--out-dir", gen.out_dir, "output directory");
  gen_cmd->add_flag("--satisfiable", gen.satisfiable,
                    "rejection-sample satisfiable instances");
  gen_cmd->add_option("--backbone-size", gen.backbone_size,
                      "rejection-sample to this backbone size");
  gen_cmd->add_option("--tolerance", gen.tolerance,
                      "backbone size band half-width");
  gen_cmd->add_option("--budget", gen.budget, "rejection attempt budget");
  gen_cmd->add_flag("--skip-analysis", gen.skip_analysis,
                    "skip solve/backbone columns in the manifest");

  // solve / backbone / count
  CommonOpts solve_o, backbone_o, count_o;
  CLI::App *solve_cmd = app.add_subcommand("solve", "complete SAT decision");
  add_common(solve_cmd, solve_o);
  CLI::App *backbone_cmd =
      app.add_subcommand("backbone", "compute the backbone");
  add_common(backbone_cmd, backbone_o);
  CLI::App *count_cmd = app.add_subcommand("count", "exact model count");
  add_common(count_cmd, count_o);

  // wsat
  CommonOpts wsat_o;
  int wsat_runs = 1000;
  double noise = 0.55;
  uint64_t max_flips = 100'000'000;
  std::vector<int> probes;
  int workers = default_workers();
  bool record_uf = false;
  std::string uf_out;
  std::string records_out;
  CLI::App *wsat_cmd = app.add_subcommand("wsat", "WSAT cost measurement");
  add_common(wsat_cmd, wsat_o);
  wsat_cmd->add_option("--runs", wsat_runs, "independent runs");
  wsat_cmd->add_option("--noise", noise, "SKC noise p");
  wsat_cmd->add_option("--max-flips", max_flips, "flip cap per run");
  wsat_cmd->add_option("--probes", probes, "f_b probe values");
  wsat_cmd->add_option("--workers", workers, "worker threads");
  wsat_cmd->add_flag("--record-uf", record_uf,
                     "record per-clause unsatisfaction frequency");
  wsat_cmd->add_option("--uf-out", uf_out, "write per-clause uf CSV here");
  wsat_cmd->add_option("--records-out", records_out,
                       "write one JSON line per run record here");

  // robustness
  CommonOpts rob_o;
  int min_trials = 100, max_trials = 1000;
  double rel_se = 0.05;
  int rob_workers = default_workers();
  CLI::App *rob_cmd =
      app.add_subcommand("robustness", "backbone robustness estimate");
  add_common(rob_cmd, rob_o);
  rob_cmd->add_option("--min-trials", min_trials, "minimum robustness trials");
  rob_cmd->add_option("--rel-se", rel_se, "convergence: se < rel-se * mean");
  rob_cmd->add_option("--max-trials", max_trials, "trial cap");
  rob_cmd->add_option("--workers", rob_workers, "worker threads");

  // bms
  CommonOpts bms_o;
  std::string bms_out = ".";
  CLI::App *bms_cmd =
      app.add_subcommand("bms", "extract a backbone-minimal sub-instance");
  add_common(bms_cmd, bms_o);
  bms_cmd->add_option("--out-dir", bms_out, "directory for DIMACS + sidecar");

  // experiment
  std::string exp_name = "cost-peak";
  std::string exp_out = "out";
  std::string from_manifest;
  std::vector<double> exp_ratios;
  std::vector<double> exp_fracs;
  int exp_instances = -1, exp_runs = -1, exp_workers = default_workers();
  uint64_t exp_seed = 1;
  int exp_n = -1;
  double exp_noise = 0.55;
  uint64_t exp_max_flips = 10'000'000;
  bool exp_reduce_control = false;
  CLI::App *exp_cmd = app.add_subcommand("experiment", "run a full experiment");
  exp_cmd->add_option("--experiment", exp_name,
                      "cost-peak | cost-vs-ratio-controlled | nsolutions | "
                      "search-behavior | robustness-vs-ratio | "
                      "robustness-correlation | bms-interpolation | uf-bc");
  exp_cmd->add_option("--n", exp_n, "variable count");
  exp_cmd->add_option("--ratio", exp_ratios, "m/n grid values");
  exp_cmd->add_option("--backbone-fraction", exp_fracs,
                      "backbone targets as fractions of n");
  exp_cmd->add_option("--instances", exp_instances, "instances per cell");
  exp_cmd->add_option("--runs", exp_runs, "WSAT runs per instance");
  exp_cmd->add_option("--noise", exp_noise, "SKC noise p");
  exp_cmd->add_option("--max-flips", exp_max_flips, "flip cap per run");
  exp_cmd->add_option("--seed", exp_seed, "root seed");
  exp_cmd->add_option("--workers", exp_workers, "worker threads");
  exp_cmd->add_option("--out", exp_out, "output directory");
  exp_cmd->add_flag("--reduce-control", exp_reduce_control,
                    "include the costly reduce-backbone control curve");
  exp_cmd->add_option("--from-manifest", from_manifest,
                      "re-run the exact config stored in a manifest.json");

  // stats
  StatsOpts stats_o;
  CLI::App *stats_cmd =
      app.add_subcommand("stats", "correlation/regression/bootstrap on CSV");
  stats_cmd->add_option("file", stats_o.file, "CSV file ('-' for stdin)");
  stats_cmd->add_option("--op", stats_o.op,
                        "pearson | spearman | ols | randomization | bootstrap");
  stats_cmd->add_option("--x", stats_o.x_col, "x column name");
  stats_cmd->add_option("--y", stats_o.y_col, "y column name");
  stats_cmd->add_option("--k", stats_o.k, "randomization permutations");
  stats_cmd->add_option("--b", stats_o.b, "bootstrap pseudo-samples");
  stats_cmd->add_option("--seed", stats_o.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen_cmd)
      return run_gen(gen);

    if (*solve_cmd) {
      CnfInstance inst = read_instance(solve_o.file);
      redirect_stdout(solve_o.out);
      SolverStats st;
      SolveResult r = solve(inst, {solve_o.max_decisions}, &st);
      if (solve_o.format == "json") {
        json out;
        out["satisfiable"] = r.satisfiable;
        out["decisions"] = st.decisions;
        out["propagations"] = st.propagations;
        if (r.witness) {
          std::vector<int> w;
          for (int v = 1; v <= inst.num_vars(); ++v)
            w.push_back(r.witness->value(v) ? v : -v);
          out["witness"] = w;
        }
        std::cout << out.dump(2) << "\n";
      } else {
        std::printf("%s\n", r.satisfiable ? "SATISFIABLE" : "UNSATISFIABLE");
        if (r.witness) {
          std::printf("v");
          for (int v = 1; v <= inst.num_vars(); ++v)
            std::printf(" %d", r.witness->value(v) ? v : -v);
          std::printf(" 0\n");
        }
        std::printf("decisions %llu propagations %llu\n",
                    static_cast<unsigned long long>(st.decisions),
                    static_cast<unsigned long long>(st.propagations));
      }
      return 0;
    }

    if (*backbone_cmd) {
      CnfInstance inst = read_instance(backbone_o.file);
      redirect_stdout(backbone_o.out);
      Backbone b = compute_backbone(inst, {backbone_o.max_decisions});
      if (backbone_o.format == "json") {
        json out;
        std::vector<int> lits;
        for (Lit l : b.literals())
          lits.push_back(l.dimacs());
        out["backbone"] = lits;
        out["size"] = b.size();
        std::cout << out.dump(2) << "\n";
      } else {
        print_backbone(b);
      }
      return 0;
    }

    if (*count_cmd) {
      CnfInstance inst = read_instance(count_o.file);
      redirect_stdout(count_o.out);
      uint64_t c = count_solutions(inst, {count_o.max_decisions});
      if (count_o.format == "json")
        std::cout << json{{"solutions", c}}.dump() << "\n";
      else
        std::printf("%llu\n", static_cast<unsigned long long>(c));
      return 0;
    }

    if (*wsat_cmd) {
      CnfInstance inst = read_instance(wsat_o.file);
      redirect_stdout(wsat_o.out);
      CostParams params;
      params.runs = wsat_runs;
      params.workers = workers;
      params.wsat.noise_p = noise;
      params.wsat.max_flips = max_flips;
      params.wsat.rng_seed = wsat_o.seed;
      params.wsat.probes = probes;
      params.wsat.record_uf = record_uf;
      InstanceCostStats st = measure_cost(inst, params);
      if (wsat_o.format == "json") {
        json out;
        out["runs"] = st.runs;
        out["median"] = st.cost;
        out["q25"] = st.q25;
        out["q75"] = st.q75;
        out["cap_exceeded_runs"] = st.cap_exceeded_runs;
        if (!std::isnan(st.median_f5)) {
          out["median_f5"] = st.median_f5;
          out["mean_f5"] = st.mean_f5;
        }
        std::cout << out.dump(2) << "\n";
      } else {
        std::printf("runs,median,q25,q75,cap_exceeded\n%d,%g,%g,%g,%d\n",
                    st.runs, st.cost, st.q25, st.q75, st.cap_exceeded_runs);
      }
      if (record_uf && !uf_out.empty()) {
        std::ofstream out(uf_out);
        out << "clause,uf\n";
        for (size_t c = 0; c < st.uf.size(); ++c)
          out << c << "," << st.uf[c] << "\n";
      }
      if (!records_out.empty()) {
        std::ofstream out(records_out);
        WsatEngine engine(inst);
        for (int i = 0; i < wsat_runs; ++i) {
          Rng run_rng(derive_seed(params.wsat.rng_seed,
                                  static_cast<uint64_t>(i)));
          out << to_json_line(engine.run(params.wsat, run_rng)) << "\n";
        }
      }
      return 0;
    }

    if (*rob_cmd) {
      CnfInstance inst = read_instance(rob_o.file);
      redirect_stdout(rob_o.out);
      RobustnessParams params;
      params.min_trials = min_trials;
      params.rel_se = rel_se;
      params.max_trials = max_trials;
      params.workers = rob_workers;
      params.solver_budget = {rob_o.max_decisions};
      RobustnessEstimate est = estimate_robustness(inst, rob_o.seed, params);
      if (rob_o.format == "json") {
        json out;
        out["mean"] = est.mean;
        out["std_error"] = est.std_error;
        out["trials"] = est.trials;
        out["converged"] = est.converged;
        std::cout << out.dump(2) << "\n";
      } else {
        std::printf("mean,std_error,trials,converged\n%g,%g,%d,%d\n", est.mean,
                    est.std_error, est.trials, est.converged ? 1 : 0);
      }
      return 0;
    }

    if (*bms_cmd) {
      CnfInstance inst = read_instance(bms_o.file);
      redirect_stdout(bms_o.out);
      Rng rng(bms_o.seed);
      BmsResult bms = find_bms(inst, rng, {bms_o.max_decisions});
      fs::create_directories(bms_out);
      char name[32];
      std::snprintf(name, sizeof(name), "%016llx",
                    static_cast<unsigned long long>(
                        bms.sub_instance.content_hash()));
      fs::path cnf = fs::path(bms_out) / (std::string(name) + ".cnf");
      write_dimacs_file(bms.sub_instance, cnf.string());
      json side;
      side["role"] = "bms";
      char phash[32];
      std::snprintf(phash, sizeof(phash), "%016llx",
                    static_cast<unsigned long long>(inst.content_hash()));
      side["parent_hash"] = phash;
      side["kept_parent_indices"] = bms.parent_indices;
      std::vector<int> removed;
      {
        std::vector<uint8_t> kept(static_cast<size_t>(inst.num_clauses()), 0);
        for (int k : bms.parent_indices)
          kept[static_cast<size_t>(k)] = 1;
        for (int k = 0; k < inst.num_clauses(); ++k)
          if (!kept[static_cast<size_t>(k)])
            removed.push_back(k);
      }
      side["removed_parent_indices"] = removed;
      std::vector<int> lits;
      for (Lit l : bms.backbone.literals())
        lits.push_back(l.dimacs());
      side["backbone"] = lits;
      side["seed"] = bms_o.seed;
      std::ofstream sidecar(fs::path(bms_out) / (std::string(name) + ".json"));
      sidecar << side.dump(2) << "\n";
      std::printf("bms clauses %d of %d, backbone size %d\n",
                  bms.sub_instance.num_clauses(), inst.num_clauses(),
                  bms.backbone.size());
      std::printf("wrote %s\n", cnf.string().c_str());
      return 0;
    }

    if (*exp_cmd) {
      ExperimentConfig cfg;
      if (!from_manifest.empty()) {
        std::ifstream in(from_manifest);
        if (!in)
          throw Error("cannot read manifest '" + from_manifest + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        cfg = parse_config_json(buf.str());
      } else {
        auto kind = experiment_from_string(exp_name);
        if (!kind)
          throw Error("unknown experiment '" + exp_name + "'");
        cfg = default_config(*kind);
        if (exp_n > 0)
          cfg.n = exp_n;
        if (!exp_ratios.empty())
          cfg.ratios = exp_ratios;
        if (!exp_fracs.empty())
          cfg.backbone_fractions = exp_fracs;
        if (exp_instances > 0)
          cfg.instances_per_cell = exp_instances;
        if (exp_runs > 0)
          cfg.runs_per_instance = exp_runs;
        cfg.noise_p = exp_noise;
        cfg.max_flips = exp_max_flips;
        cfg.root_seed = exp_seed;
        cfg.interpolation_reduce_control = exp_reduce_control;
      }
      cfg.workers = exp_workers;
      cfg.out_dir = exp_out;
      ExperimentResult res = run_experiment(cfg);
      std::printf("experiment %s: %d units (%d resumed, %d flagged)\n",
                  to_string(cfg.experiment).c_str(), res.units_total,
                  res.units_skipped, res.units_flagged);
      for (const std::string &p : res.csv_paths)
        std::printf("wrote %s\n", p.c_str());
      return 0;
    }

    if (*stats_cmd)
      return run_stats(stats_o);
  } catch (const BudgetExhausted &e) {
    std::fprintf(stderr, "satkit: budget exhausted: %s\n", e.what());
    return 3;
  } catch (const ParseError &e) {
    std::fprintf(stderr, "satkit: %s\n", e.what());
    return 2;
  } catch (const Error &e) {
    std::fprintf(stderr, "satkit: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument &e) {
    std::fprintf(stderr, "satkit: %s\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "satkit: internal error: %s\n", e.what());
    return 2;
  }
  return 1;
}
