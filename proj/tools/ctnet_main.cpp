// Command-line front end: dataset generation, reconstruction, alias
// analysis and the batch evaluation study.
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ctnet/aliasing.hpp"
#include "ctnet/errors.hpp"
#include "ctnet/evalharness.hpp"
#include "ctnet/io.hpp"
#include "ctnet/reconstruct.hpp"
#include "ctnet/simulate.hpp"

namespace fs = std::filesystem;
using namespace ctnet;

namespace {

struct CliError {};  // carries no state; exit code decided at the catch site

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty())
    std::printf("%s\n", j.dump(2).c_str());
  else
    write_json_file(out_path, j);
}

long count_nonzero(const Matrix& M, double tol) {
  long k = 0;
  for (Eigen::Index i = 0; i < M.size(); ++i)
    if (std::abs(M.data()[i]) > tol) ++k;
  return k;
}

int run(int argc, char** argv) {
  CLI::App app{"Sparse continuous-time network reconstruction from sampled data"};
  app.require_subcommand(1);
  // long-only help everywhere: -h would shadow the --h sample-period option
  app.set_help_flag("--help", "Print this help message and exit");

  // --- gen ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a random sparse system and one trajectory");
  std::string gen_out, gen_config;
  ExperimentConfig gcfg;
  std::string gen_input_kind;
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  gen->add_option("--config", gen_config, "Experiment config JSON (CLI flags override it)");
  auto* o_n = gen->add_option("--n", gcfg.n, "State dimension");
  auto* o_density = gen->add_option("--density", gcfg.density, "Extra-edge probability");
  auto* o_trans = gen->add_option("--transitions", gcfg.transitions, "Number of state transitions");
  auto* o_h = gen->add_option("--h", gcfg.h, "Sample period (<= 0: automatic)");
  auto* o_hf = gen->add_option("--auto-h-factor", gcfg.auto_h_factor,
                               "Fraction of the critical period used when h is automatic");
  auto* o_snr = gen->add_option("--snr-db", gcfg.snr_db, "Process-noise SNR in dB");
  auto* o_nonoise = gen->add_flag("--no-noise", "Disable process noise entirely");
  auto* o_ikind = gen->add_option("--input", gen_input_kind, "Input kind: none | square_wave");
  auto* o_iper = gen->add_option("--input-period", gcfg.input_period,
                                 "Square-wave period (<= 0: four sample periods)");
  auto* o_iamp = gen->add_option("--input-amplitude", gcfg.input_amplitude, "Square-wave amplitude");
  auto* o_ivar = gen->add_option("--init-var", gcfg.init_var, "Initial-state variance");
  auto* o_seed = gen->add_option("--seed", gcfg.seed, "RNG seed");

  // --- reconstruct -------------------------------------------------------
  auto* rec = app.add_subcommand("reconstruct", "Estimate a sparse drift matrix from a trajectory");
  std::string rec_data, rec_series, rec_out, rec_solver_cfg, rec_mode, rec_sweep;
  SolverOptions ropt;
  rec->add_option("--data", rec_data, "Dataset directory (config.json + series.csv)");
  rec->add_option("--series", rec_series, "Bare series CSV (alternative to --data)");
  rec->add_option("--out", rec_out, "Output directory")->required();
  rec->add_option("--solver-config", rec_solver_cfg, "Solver options JSON (flags override it)");
  auto* r_lambda = rec->add_option("--lambda", ropt.lambda, "L1 penalty weight");
  rec->add_option("--lambda-sweep", rec_sweep, "Comma-separated penalty weights; writes result_###.json");
  auto* r_mode = rec->add_option("--mode", rec_mode, "a_only | joint | joint_diag_b");
  auto* r_maxit = rec->add_option("--max-iter", ropt.max_iter, "Outer iteration cap");
  auto* r_steptol = rec->add_option("--step-tol", ropt.step_tol, "Stop when the step norm drops below");
  auto* r_kkttol = rec->add_option("--kkt-tol", ropt.kkt_tol, "Stationarity tolerance report threshold");

  // --- alias -------------------------------------------------------------
  auto* alias = app.add_subcommand("alias", "Sampling-rate aliasing analysis");
  alias->require_subcommand(1);

  auto* ab = alias->add_subcommand("bound", "Alias-free sampling limits of a system");
  std::string ab_system, ab_out;
  ab->add_option("--system", ab_system, "CT system JSON (field A)")->required();
  ab->add_option("--out", ab_out, "Output JSON (default: stdout)");

  auto* at = alias->add_subcommand("test", "Test a candidate model against a probe series");
  std::string at_model, at_probe, at_out;
  double at_h1 = 0.0, at_alpha = 0.05;
  at->add_option("--model", at_model, "Candidate CT system JSON")->required();
  at->add_option("--h1", at_h1, "Sampling period the candidate was estimated at")->required();
  at->add_option("--probe", at_probe, "Probe series CSV at a different rate")->required();
  at->add_option("--alpha", at_alpha, "Test level");
  at->add_option("--out", at_out, "Output JSON (default: stdout)");

  auto* ae = alias->add_subcommand("enum", "Enumerate the alias set of a discrete transition");
  std::string ae_system, ae_discrete, ae_out;
  double ae_h = 0.0, ae_kappa = 0.0, ae_zero_tol = 1e-8;
  ae->add_option("--system", ae_system, "CT system JSON; its discretization at --h is enumerated");
  ae->add_option("--discrete", ae_discrete, "DT system JSON (fields Ad, h)");
  ae->add_option("--h", ae_h, "Sample period (required with --system)");
  ae->add_option("--kappa", ae_kappa, "Weighted-norm radius")->required();
  ae->add_option("--zero-tol", ae_zero_tol, "Magnitude threshold for the sparsest member");
  ae->add_option("--out", ae_out, "Output JSON (default: stdout)");

  // --- eval --------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "Monte-Carlo structure-recovery study");
  std::string ev_out, ev_config, ev_solver_cfg, ev_mode;
  BatchOptions bopt;
  bool ev_no_plots = false, ev_serial = false;
  double ev_lambda = bopt.solver.lambda;
  ev->add_option("--out", ev_out, "Output directory")->required();
  ev->add_option("--systems", bopt.systems, "Number of random systems");
  ev->add_option("--seed", bopt.master_seed, "Master seed; per-dataset seeds derive from it");
  ev->add_option("--grid-points", bopt.grid_points, "Threshold grid resolution");
  ev->add_option("--config", ev_config, "Experiment template JSON");
  ev->add_option("--solver-config", ev_solver_cfg, "Solver options JSON");
  auto* e_lambda = ev->add_option("--lambda", ev_lambda, "L1 penalty weight");
  auto* e_mode = ev->add_option("--mode", ev_mode, "a_only | joint | joint_diag_b");
  ev->add_flag("--no-plots", ev_no_plots, "Skip SVG plot output");
  ev->add_flag("--serial", ev_serial, "Force the serial batch driver");
  ev->add_flag("--no-baseline", "Skip the matrix-logarithm baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;  // --help and friends
    throw CliError{};
  }

  if (gen->parsed()) {
    ExperimentConfig cfg;
    if (!gen_config.empty()) cfg = config_from_json(read_json_file(gen_config));
    if (o_n->count()) cfg.n = gcfg.n;
    if (o_density->count()) cfg.density = gcfg.density;
    if (o_trans->count()) cfg.transitions = gcfg.transitions;
    if (o_h->count()) cfg.h = gcfg.h;
    if (o_hf->count()) cfg.auto_h_factor = gcfg.auto_h_factor;
    if (o_snr->count()) cfg.snr_db = gcfg.snr_db;
    if (o_nonoise->count()) cfg.no_noise = true;
    if (o_ikind->count()) cfg.input_kind = input_kind_from_string(gen_input_kind);
    if (o_iper->count()) cfg.input_period = gcfg.input_period;
    if (o_iamp->count()) cfg.input_amplitude = gcfg.input_amplitude;
    if (o_ivar->count()) cfg.init_var = gcfg.init_var;
    if (o_seed->count()) cfg.seed = gcfg.seed;
    cfg.validate();
    const Dataset ds = make_dataset(cfg);
    write_dataset(gen_out, ds);
    std::printf("gen: n=%d transitions=%d h=%.6g seed=%llu -> %s\n", ds.config.n,
                ds.config.transitions, ds.config.h,
                static_cast<unsigned long long>(ds.config.seed), gen_out.c_str());
    return 0;
  }

  if (rec->parsed()) {
    if (rec_data.empty() == rec_series.empty())
      throw InvalidInputError("reconstruct: give exactly one of --data or --series");
    TimeSeries series;
    if (!rec_data.empty())
      series = read_dataset(rec_data).series;
    else
      series = read_series_csv(rec_series);

    SolverOptions opt;
    if (!rec_solver_cfg.empty()) opt = solver_options_from_json(read_json_file(rec_solver_cfg));
    if (r_lambda->count()) opt.lambda = ropt.lambda;
    if (r_mode->count()) opt.mode = mode_from_string(rec_mode);
    if (r_maxit->count()) opt.max_iter = ropt.max_iter;
    if (r_steptol->count()) opt.step_tol = ropt.step_tol;
    if (r_kkttol->count()) opt.kkt_tol = ropt.kkt_tol;

    std::vector<double> lambdas;
    if (!rec_sweep.empty()) {
      std::string tok;
      for (char c : rec_sweep + ",") {
        if (c == ',') {
          if (!tok.empty()) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size())
              throw InvalidInputError("reconstruct: bad --lambda-sweep entry '" + tok + "'");
            lambdas.push_back(v);
            tok.clear();
          }
        } else if (c != ' ') {
          tok += c;
        }
      }
      if (lambdas.empty()) throw InvalidInputError("reconstruct: empty --lambda-sweep");
    }

    fs::create_directories(rec_out);
    write_json_file((fs::path(rec_out) / "solver.json").string(), to_json(opt));
    if (lambdas.empty()) {
      const SolveReport rep = reconstruct(series, opt);
      write_json_file((fs::path(rec_out) / "result.json").string(), to_json(rep));
      std::printf("reconstruct: lambda=%.6g objective=%.8g nnz=%ld iters=%d kkt=%.3g %s\n",
                  rep.lambda, rep.final_objective, count_nonzero(rep.A, 0.0), rep.iterations,
                  rep.kkt_violation, rep.termination.c_str());
    } else {
      Json runs = Json::array();
      for (size_t i = 0; i < lambdas.size(); ++i) {
        opt.lambda = lambdas[i];
        const SolveReport rep = reconstruct(series, opt);
        char name[40];
        std::snprintf(name, sizeof name, "result_%03zu.json", i);
        write_json_file((fs::path(rec_out) / name).string(), to_json(rep));
        runs.push_back(Json{{"lambda", rep.lambda},
                            {"file", name},
                            {"objective", rep.final_objective},
                            {"nonzeros", count_nonzero(rep.A, 0.0)},
                            {"iterations", rep.iterations},
                            {"termination", rep.termination}});
        std::printf("reconstruct[%zu]: lambda=%.6g objective=%.8g nnz=%ld %s\n", i, rep.lambda,
                    rep.final_objective, count_nonzero(rep.A, 0.0), rep.termination.c_str());
      }
      write_json_file((fs::path(rec_out) / "sweep.json").string(),
                      Json{{"lambdas", lambdas}, {"runs", runs}});
    }
    return 0;
  }

  if (ab->parsed()) {
    const CTSystem sys = ct_system_from_json(read_json_file(ab_system));
    emit(to_json(sampling_bound(sys.A)), ab_out);
    return 0;
  }

  if (at->parsed()) {
    const CTSystem model = ct_system_from_json(read_json_file(at_model));
    const TimeSeries probe = read_series_csv(at_probe);
    const AliasTestReport rep = alias_test(model, at_h1, probe, at_alpha);
    emit(to_json(rep), at_out);
    return 0;
  }

  if (ae->parsed()) {
    Matrix Ad;
    double h = 0.0;
    if (!ae_discrete.empty()) {
      const DTSystem d = dt_system_from_json(read_json_file(ae_discrete));
      Ad = d.Ad;
      h = d.h;
    } else if (!ae_system.empty()) {
      if (!(ae_h > 0.0)) throw InvalidInputError("alias enum: --system requires --h > 0");
      const CTSystem sys = ct_system_from_json(read_json_file(ae_system));
      Ad = expm(ae_h * sys.A);
      h = ae_h;
    } else {
      throw InvalidInputError("alias enum: give --system or --discrete");
    }
    const AliasSet set = enumerate_aliases(Ad, h, ae_kappa);
    Json j = to_json(set);
    if (!set.members.empty()) {
      const AliasMember& sp = sparsest_alias(set, ae_zero_tol);
      j["sparsest"] = Json{{"A", matrix_to_json(sp.A)},
                           {"nonzeros", count_nonzero(sp.A, ae_zero_tol)},
                           {"weighted_norm", sp.weighted_norm}};
    }
    emit(j, ae_out);
    return 0;
  }

  if (ev->parsed()) {
    if (!ev_config.empty()) bopt.config = config_from_json(read_json_file(ev_config));
    if (!ev_solver_cfg.empty()) bopt.solver = solver_options_from_json(read_json_file(ev_solver_cfg));
    if (e_lambda->count()) bopt.solver.lambda = ev_lambda;
    if (e_mode->count()) bopt.solver.mode = mode_from_string(ev_mode);
    if (ev->count("--no-baseline")) bopt.logm_baseline = false;
    fs::create_directories(ev_out);
    write_json_file((fs::path(ev_out) / "eval_config.json").string(),
                    Json{{"systems", bopt.systems},
                         {"master_seed", bopt.master_seed},
                         {"grid_points", bopt.grid_points},
                         {"logm_baseline", bopt.logm_baseline},
                         {"score_floor_rel", bopt.score_floor_rel},
                         {"config", to_json(bopt.config)},
                         {"solver", to_json(bopt.solver)}});
    const BatchReport rep = ev_serial ? run_batch_serial(bopt) : run_batch(bopt);
    write_batch_outputs(ev_out, rep, !ev_no_plots);
    std::printf("eval: %d systems in %.1fs; proposed AUC %.4f +- %.4f (%d curves, %d failed)",
                bopt.systems, rep.total_seconds, rep.proposed.mean_auc, rep.proposed.std_auc,
                rep.proposed.curves, rep.proposed.failed);
    if (rep.baseline.curves > 0)
      std::printf("; baseline AUC %.4f +- %.4f (%d curves)", rep.baseline.mean_auc,
                  rep.baseline.std_auc, rep.baseline.curves);
    std::printf("\n");
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CliError&) {
    return 2;
  } catch (const ParseError& e) {
    if (e.line() > 0)
      std::fprintf(stderr, "error: %s (line %ld)\n", e.what(), e.line());
    else
      std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const InvalidInputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
