#include "ctnet/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ctnet/errors.hpp"
#include "ctnet/svg.hpp"

namespace ctnet {

namespace fs = std::filesystem;

namespace {

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double json_number(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInputError(std::string("json: missing field ") + key);
  const Json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw InvalidInputError(std::string("json: field is not a number: ") + key);
  return v.get<double>();
}

Json number_or_null(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

}  // namespace

Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const char* name) {
  if (!j.is_array()) throw InvalidInputError(std::string("json: ") + name + " must be an array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  Eigen::Index cols = -1;
  for (const Json& row : j) {
    if (!row.is_array())
      throw InvalidInputError(std::string("json: ") + name + " rows must be arrays");
    if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
    else if (cols != static_cast<Eigen::Index>(row.size()))
      throw InvalidInputError(std::string("json: ") + name + " is ragged");
  }
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = j.at(static_cast<size_t>(i)).at(static_cast<size_t>(c));
      if (!v.is_number())
        throw InvalidInputError(std::string("json: ") + name + " has a non-numeric entry");
      M(i, c) = v.get<double>();
    }
  return M;
}

Json to_json(const CTSystem& sys) {
  return Json{{"A", matrix_to_json(sys.A)}, {"B", matrix_to_json(sys.B)},
              {"R", matrix_to_json(sys.R)}};
}

CTSystem ct_system_from_json(const Json& j) {
  CTSystem sys;
  sys.A = matrix_from_json(j.at("A"), "A");
  const Eigen::Index n = sys.A.rows();
  sys.B = j.contains("B") ? matrix_from_json(j.at("B"), "B") : Matrix(n, 0);
  if (sys.B.rows() == 0 && sys.B.cols() == 0) sys.B = Matrix(n, 0);
  sys.R = j.contains("R") ? matrix_from_json(j.at("R"), "R") : Matrix(Matrix::Zero(n, n));
  sys.validate();
  return sys;
}

Json to_json(const DTSystem& sys) {
  return Json{{"Ad", matrix_to_json(sys.Ad)},
              {"Bd", matrix_to_json(sys.Bd)},
              {"Rd", matrix_to_json(sys.Rd)},
              {"h", sys.h}};
}

DTSystem dt_system_from_json(const Json& j) {
  DTSystem d;
  d.Ad = matrix_from_json(j.at("Ad"), "Ad");
  d.Bd = j.contains("Bd") ? matrix_from_json(j.at("Bd"), "Bd") : Matrix(d.Ad.rows(), 0);
  if (d.Bd.rows() == 0 && d.Bd.cols() == 0) d.Bd = Matrix(d.Ad.rows(), 0);
  d.Rd = j.contains("Rd") ? matrix_from_json(j.at("Rd"), "Rd")
                          : Matrix(Matrix::Zero(d.Ad.rows(), d.Ad.rows()));
  d.h = json_number(j, "h");
  if (!(d.h > 0.0)) throw InvalidInputError("json: DT system h must be positive");
  return d;
}

std::string input_kind_to_string(InputKind k) {
  return k == InputKind::square_wave ? "square_wave" : "none";
}

InputKind input_kind_from_string(const std::string& s) {
  if (s == "none") return InputKind::none;
  if (s == "square_wave") return InputKind::square_wave;
  throw InvalidInputError("json: unknown input kind: " + s);
}

Json to_json(const ExperimentConfig& cfg) {
  return Json{{"n", cfg.n},
              {"density", cfg.density},
              {"transitions", cfg.transitions},
              {"h", cfg.h},
              {"auto_h_factor", cfg.auto_h_factor},
              {"snr_db", cfg.snr_db},
              {"no_noise", cfg.no_noise},
              {"input_kind", input_kind_to_string(cfg.input_kind)},
              {"input_period", cfg.input_period},
              {"input_amplitude", cfg.input_amplitude},
              {"init_var", cfg.init_var},
              {"seed", cfg.seed}};
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  if (j.contains("n")) cfg.n = j.at("n").get<int>();
  if (j.contains("density")) cfg.density = json_number(j, "density");
  if (j.contains("transitions")) cfg.transitions = j.at("transitions").get<int>();
  if (j.contains("h")) cfg.h = json_number(j, "h");
  if (j.contains("auto_h_factor")) cfg.auto_h_factor = json_number(j, "auto_h_factor");
  if (j.contains("snr_db")) cfg.snr_db = json_number(j, "snr_db");
  if (j.contains("no_noise")) cfg.no_noise = j.at("no_noise").get<bool>();
  if (j.contains("input_kind"))
    cfg.input_kind = input_kind_from_string(j.at("input_kind").get<std::string>());
  if (j.contains("input_period")) cfg.input_period = json_number(j, "input_period");
  if (j.contains("input_amplitude")) cfg.input_amplitude = json_number(j, "input_amplitude");
  if (j.contains("init_var")) cfg.init_var = json_number(j, "init_var");
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

std::string mode_to_string(EstimationMode m) {
  switch (m) {
    case EstimationMode::a_only: return "a_only";
    case EstimationMode::joint: return "joint";
    case EstimationMode::joint_diag_b: return "joint_diag_b";
  }
  return "a_only";
}

EstimationMode mode_from_string(const std::string& s) {
  if (s == "a_only") return EstimationMode::a_only;
  if (s == "joint") return EstimationMode::joint;
  if (s == "joint_diag_b") return EstimationMode::joint_diag_b;
  throw InvalidInputError("json: unknown estimation mode: " + s);
}

Json to_json(const SolverOptions& opt) {
  return Json{{"lambda", opt.lambda},
              {"mode", mode_to_string(opt.mode)},
              {"max_iter", opt.max_iter},
              {"step_tol", opt.step_tol},
              {"armijo_alpha", opt.armijo_alpha},
              {"backtrack_beta", opt.backtrack_beta},
              {"min_step", opt.min_step},
              {"epsilon", opt.epsilon},
              {"kkt_tol", opt.kkt_tol},
              {"qp_eps_abs", opt.qp.eps_abs},
              {"qp_eps_rel", opt.qp.eps_rel},
              {"qp_max_iter", opt.qp.max_iter}};
}

SolverOptions solver_options_from_json(const Json& j) {
  SolverOptions opt;
  if (j.contains("lambda")) opt.lambda = json_number(j, "lambda");
  if (j.contains("mode")) opt.mode = mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("max_iter")) opt.max_iter = j.at("max_iter").get<int>();
  if (j.contains("step_tol")) opt.step_tol = json_number(j, "step_tol");
  if (j.contains("armijo_alpha")) opt.armijo_alpha = json_number(j, "armijo_alpha");
  if (j.contains("backtrack_beta")) opt.backtrack_beta = json_number(j, "backtrack_beta");
  if (j.contains("min_step")) opt.min_step = json_number(j, "min_step");
  if (j.contains("epsilon")) opt.epsilon = json_number(j, "epsilon");
  if (j.contains("kkt_tol")) opt.kkt_tol = json_number(j, "kkt_tol");
  if (j.contains("qp_eps_abs")) opt.qp.eps_abs = json_number(j, "qp_eps_abs");
  if (j.contains("qp_eps_rel")) opt.qp.eps_rel = json_number(j, "qp_eps_rel");
  if (j.contains("qp_max_iter")) opt.qp.max_iter = j.at("qp_max_iter").get<int>();
  return opt;
}

Json to_json(const SolveReport& rep) {
  return Json{{"A", matrix_to_json(rep.A)},
              {"B", matrix_to_json(rep.B)},
              {"Rd_hat", matrix_to_json(rep.Rd_hat)},
              {"objective", rep.objective},
              {"step_norm", rep.step_norm},
              {"step_size", rep.step_size},
              {"constraint_violation", rep.constraint_violation},
              {"qp_iterations", rep.qp_iterations},
              {"iterations", rep.iterations},
              {"termination", rep.termination},
              {"kkt_violation", rep.kkt_violation},
              {"final_objective", rep.final_objective},
              {"init_log_ok", rep.init_log_ok},
              {"lambda", rep.lambda},
              {"mode", mode_to_string(rep.mode)}};
}

Json to_json(const SamplingBound& b) {
  return Json{{"max_abs_imag", b.max_abs_imag},
              {"omega_min", b.omega_min},
              {"h_max", number_or_null(b.h_max)}};
}

Json to_json(const AliasTestReport& rep) {
  std::vector<double> pp(rep.per_channel_p.data(), rep.per_channel_p.data() + rep.per_channel_p.size());
  std::vector<double> pt(rep.per_channel_t.data(), rep.per_channel_t.data() + rep.per_channel_t.size());
  return Json{{"h1", rep.h1},
              {"h2", rep.h2},
              {"alpha", rep.alpha},
              {"p_value", rep.p_value},
              {"reject", rep.reject},
              {"per_channel_p", pp},
              {"per_channel_t", pt},
              {"errors", matrix_to_json(rep.errors)}};
}

Json to_json(const AliasSet& set) {
  Json members = Json::array();
  for (const AliasMember& m : set.members) {
    std::vector<int> j(m.j.data(), m.j.data() + m.j.size());
    members.push_back(Json{{"A", matrix_to_json(m.A)},
                           {"j", j},
                           {"weighted_norm", m.weighted_norm},
                           {"exp_residual", m.exp_residual}});
  }
  Json logs = Json::array();
  for (Eigen::Index i = 0; i < set.log_principal.size(); ++i)
    logs.push_back(Json{{"re", set.log_principal[i].real()}, {"im", set.log_principal[i].imag()}});
  std::vector<double> beta(set.beta.data(), set.beta.data() + set.beta.size());
  return Json{{"h", set.h},
              {"kappa", set.kappa},
              {"members", std::move(members)},
              {"log_principal", std::move(logs)},
              {"beta", beta},
              {"count", set.members.size()}};
}

Json to_json(const BatchReport& rep) {
  auto agg_json = [](const MethodAggregate& a) {
    Json pts = Json::array();
    for (size_t g = 0; g < a.per_point_mean.size(); ++g) {
      const CurvePoint& p = a.per_point_mean[g];
      Json pj{{"threshold", p.threshold},
              {"mean_fpr", p.fpr},
              {"mean_tpr", p.tpr},
              {"precision_defined", a.precision_defined[g]}};
      if (p.precision) pj["mean_precision"] = *p.precision;
      else pj["mean_precision"] = nullptr;
      pts.push_back(std::move(pj));
    }
    return Json{{"mean_auc", a.mean_auc},
                {"std_auc", a.std_auc},
                {"auc_values", a.auc_values},
                {"curves", a.curves},
                {"failed", a.failed},
                {"points", std::move(pts)}};
  };
  Json outs = Json::array();
  for (const DatasetOutcome& o : rep.outcomes) {
    Json oj{{"seed", o.seed},
            {"ok", o.ok},
            {"seconds", o.seconds},
            {"iterations", o.iterations},
            {"termination", o.termination},
            {"kkt_violation", o.kkt_violation}};
    if (!o.ok) oj["error"] = o.error;
    oj["auc_proposed"] = o.auc_proposed ? Json(*o.auc_proposed) : Json(nullptr);
    oj["auc_logm"] = o.auc_logm ? Json(*o.auc_logm) : Json(nullptr);
    outs.push_back(std::move(oj));
  }
  std::vector<double> grid(rep.grid.data(), rep.grid.data() + rep.grid.size());
  return Json{{"master_seed", rep.master_seed},
              {"grid", grid},
              {"proposed", agg_json(rep.proposed)},
              {"baseline", agg_json(rep.baseline)},
              {"outcomes", std::move(outs)},
              {"total_seconds", rep.total_seconds}};
}

// ---------------------------------------------------------------------------
// Files.

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw InvalidInputError("io: cannot open " + path + " for writing");
  f << content;
  if (!f.good()) throw InvalidInputError("io: write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInputError("io: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void write_series_csv(const std::string& path, const TimeSeries& ts) {
  ts.validate();
  std::ostringstream s;
  s << "t";
  for (int i = 1; i <= ts.n(); ++i) s << ",y" << i;
  for (int i = 1; i <= ts.m(); ++i) s << ",u" << i;
  s << "\n";
  for (int k = 0; k < ts.samples(); ++k) {
    s << num17(ts.t0 + k * ts.h);
    for (int i = 0; i < ts.n(); ++i) s << "," << num17(ts.Y(i, k));
    for (int i = 0; i < ts.m(); ++i) s << "," << num17(ts.U(i, k));
    s << "\n";
  }
  write_text_file(path, s.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (std::string& t : out) {
    size_t b = t.find_first_not_of(" \t");
    size_t e = t.find_last_not_of(" \t");
    t = b == std::string::npos ? "" : t.substr(b, e - b + 1);
  }
  return out;
}

double parse_double(const std::string& tok, long line) {
  if (tok.empty()) throw ParseError("series: empty field", line);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) throw ParseError("series: bad number '" + tok + "'", line);
  return v;
}

}  // namespace

TimeSeries read_series_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInputError("io: cannot open " + path);
  std::string line;
  long lineno = 0;
  if (!std::getline(f, line)) throw ParseError("series: empty file", 1);
  ++lineno;
  const std::vector<std::string> head = split_csv_line(line);
  if (head.empty() || head[0] != "t") throw ParseError("series: first column must be t", lineno);
  int n = 0, m = 0;
  size_t idx = 1;
  while (idx < head.size() && head[idx] == "y" + std::to_string(n + 1)) {
    ++n;
    ++idx;
  }
  while (idx < head.size() && head[idx] == "u" + std::to_string(m + 1)) {
    ++m;
    ++idx;
  }
  if (idx != head.size() || n == 0)
    throw ParseError("series: header must be t,y1..yn[,u1..um]", lineno);
  std::vector<double> tv;
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> tok = split_csv_line(line);
    if (static_cast<int>(tok.size()) != 1 + n + m)
      throw ParseError("series: expected " + std::to_string(1 + n + m) + " fields, got " +
                           std::to_string(tok.size()),
                       lineno);
    std::vector<double> vals(tok.size());
    for (size_t c = 0; c < tok.size(); ++c) vals[c] = parse_double(tok[c], lineno);
    tv.push_back(vals[0]);
    rows.push_back(std::move(vals));
  }
  if (rows.size() < 2) throw ParseError("series: need at least two samples", lineno);
  const double h = tv[1] - tv[0];
  if (!(h > 0.0)) throw ParseError("series: time stamps must increase", 3);
  for (size_t k = 1; k < tv.size(); ++k) {
    if (std::abs(tv[k] - tv[k - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw ParseError("series: time stamps are not equidistant", static_cast<long>(k) + 2);
  }
  TimeSeries ts;
  ts.t0 = tv[0];
  ts.h = h;
  ts.Y.resize(n, static_cast<Eigen::Index>(rows.size()));
  ts.U.resize(m, m > 0 ? static_cast<Eigen::Index>(rows.size()) : 0);
  for (size_t k = 0; k < rows.size(); ++k) {
    for (int i = 0; i < n; ++i) ts.Y(i, static_cast<Eigen::Index>(k)) = rows[k][1 + i];
    for (int i = 0; i < m; ++i) ts.U(i, static_cast<Eigen::Index>(k)) = rows[k][1 + n + i];
  }
  ts.validate();
  return ts;
}

void write_dataset(const std::string& dir, const Dataset& ds) {
  fs::create_directories(dir);
  write_json_file((fs::path(dir) / "config.json").string(), to_json(ds.config));
  write_json_file((fs::path(dir) / "truth.json").string(), to_json(ds.truth));
  write_series_csv((fs::path(dir) / "series.csv").string(), ds.series);
}

Dataset read_dataset(const std::string& dir) {
  Dataset ds;
  ds.config = config_from_json(read_json_file((fs::path(dir) / "config.json").string()));
  ds.truth = ct_system_from_json(read_json_file((fs::path(dir) / "truth.json").string()));
  ds.series = read_series_csv((fs::path(dir) / "series.csv").string());
  return ds;
}

void write_batch_outputs(const std::string& dir, const BatchReport& rep, bool plots) {
  fs::create_directories(dir);
  write_json_file((fs::path(dir) / "report.json").string(), to_json(rep));
  const int G = static_cast<int>(rep.grid.size());
  auto cell = [](double v) { return std::isfinite(v) ? num17(v) : std::string("nan"); };
  {
    std::ostringstream s;
    s << "threshold,mean_fpr,std_fpr,mean_tpr,std_tpr,min_tpr,max_tpr,"
      << "base_mean_fpr,base_std_fpr,base_mean_tpr,base_std_tpr\n";
    for (int g = 0; g < G; ++g) {
      const CurvePoint& p = rep.proposed.per_point_mean[static_cast<size_t>(g)];
      s << num17(rep.grid[g]) << "," << cell(p.fpr) << "," << cell(rep.proposed.std_fpr[g]) << ","
        << cell(p.tpr) << "," << cell(rep.proposed.std_tpr[g]) << ","
        << cell(rep.proposed.min_tpr[g]) << "," << cell(rep.proposed.max_tpr[g]);
      if (rep.baseline.curves > 0) {
        const CurvePoint& b = rep.baseline.per_point_mean[static_cast<size_t>(g)];
        s << "," << cell(b.fpr) << "," << cell(rep.baseline.std_fpr[g]) << "," << cell(b.tpr)
          << "," << cell(rep.baseline.std_tpr[g]);
      } else {
        s << ",nan,nan,nan,nan";
      }
      s << "\n";
    }
    write_text_file((fs::path(dir) / "roc.csv").string(), s.str());
  }
  {
    std::ostringstream s;
    s << "threshold,mean_recall,std_recall,mean_precision,std_precision,precision_defined,"
      << "base_mean_precision,base_std_precision,base_precision_defined\n";
    for (int g = 0; g < G; ++g) {
      const CurvePoint& p = rep.proposed.per_point_mean[static_cast<size_t>(g)];
      s << num17(rep.grid[g]) << "," << cell(p.tpr) << "," << cell(rep.proposed.std_recall[g])
        << "," << (p.precision ? num17(*p.precision) : std::string("nan")) << ","
        << cell(rep.proposed.std_precision[g]) << ","
        << rep.proposed.precision_defined[static_cast<size_t>(g)];
      if (rep.baseline.curves > 0) {
        const CurvePoint& b = rep.baseline.per_point_mean[static_cast<size_t>(g)];
        s << "," << (b.precision ? num17(*b.precision) : std::string("nan")) << ","
          << cell(rep.baseline.std_precision[g]) << ","
          << rep.baseline.precision_defined[static_cast<size_t>(g)];
      } else {
        s << ",nan,nan,0";
      }
      s << "\n";
    }
    write_text_file((fs::path(dir) / "pr.csv").string(), s.str());
  }
  if (!plots) return;
  auto roc_line = [&](const MethodAggregate& a, const std::string& color,
                      const std::string& label) {
    PlotLine l;
    l.stroke = color;
    l.label = label;
    for (const CurvePoint& p : a.per_point_mean) {
      l.x.push_back(p.fpr);
      l.y.push_back(p.tpr);
    }
    return l;
  };
  {
    std::vector<PlotLine> lines;
    std::vector<PlotBand> bands;
    PlotBand band;
    for (size_t g = 0; g < rep.proposed.per_point_mean.size(); ++g) {
      const CurvePoint& p = rep.proposed.per_point_mean[g];
      band.x.push_back(p.fpr);
      band.lo.push_back(p.tpr - rep.proposed.std_tpr[static_cast<Eigen::Index>(g)]);
      band.hi.push_back(p.tpr + rep.proposed.std_tpr[static_cast<Eigen::Index>(g)]);
    }
    bands.push_back(std::move(band));
    lines.push_back(roc_line(rep.proposed, "#1f77b4", "proposed"));
    if (rep.baseline.curves > 0) lines.push_back(roc_line(rep.baseline, "#d62728", "logm baseline"));
    write_svg_plot((fs::path(dir) / "roc.svg").string(), "ROC (mean over datasets, band: 1 std)",
                   "false positive rate", "true positive rate", bands, lines);
  }
  {
    std::vector<PlotLine> lines;
    std::vector<PlotBand> bands;
    std::vector<std::pair<double, double>> shade;
    PlotLine prop;
    prop.stroke = "#1f77b4";
    prop.label = "proposed";
    PlotBand band;
    const int K = rep.proposed.curves;
    bool in_undef = false;
    double undef_start = 0.0;
    for (size_t g = 0; g < rep.proposed.per_point_mean.size(); ++g) {
      const CurvePoint& p = rep.proposed.per_point_mean[g];
      if (p.precision) {
        prop.x.push_back(p.tpr);
        prop.y.push_back(*p.precision);
        band.x.push_back(p.tpr);
        band.lo.push_back(*p.precision - rep.proposed.std_precision[static_cast<Eigen::Index>(g)]);
        band.hi.push_back(*p.precision + rep.proposed.std_precision[static_cast<Eigen::Index>(g)]);
      }
      const bool undef = rep.proposed.precision_defined[g] < K;
      if (undef && !in_undef) {
        in_undef = true;
        undef_start = p.tpr;
      } else if (!undef && in_undef) {
        in_undef = false;
        shade.emplace_back(std::min(undef_start, p.tpr), std::max(undef_start, p.tpr));
      }
    }
    if (in_undef) shade.emplace_back(0.0, undef_start);
    bands.push_back(std::move(band));
    if (rep.baseline.curves > 0) {
      PlotLine base;
      base.stroke = "#d62728";
      base.label = "logm baseline";
      for (const CurvePoint& p : rep.baseline.per_point_mean)
        if (p.precision) {
          base.x.push_back(p.tpr);
          base.y.push_back(*p.precision);
        }
      lines.push_back(std::move(base));
    }
    lines.insert(lines.begin(), std::move(prop));
    write_svg_plot((fs::path(dir) / "pr.svg").string(),
                   "Precision-recall (mean, band: 1 std, grey: partially undefined)", "recall",
                   "precision", bands, lines, shade);
  }
}

}  // namespace ctnet
