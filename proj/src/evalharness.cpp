#include "ctnet/evalharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <omp.h>

#include "ctnet/errors.hpp"
#include "ctnet/rng.hpp"

namespace ctnet {

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo)) throw InvalidInputError("log_spaced: need 0 < lo < hi");
  if (count < 2) throw InvalidInputError("log_spaced: need at least two values");
  std::vector<double> out(static_cast<size_t>(count));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    out[static_cast<size_t>(i)] = std::exp(llo + (lhi - llo) * i / (count - 1));
  return out;
}

Vector threshold_grid(const std::vector<double>& pooled_scores, int count) {
  double smax = 0.0;
  double smin_pos = std::numeric_limits<double>::infinity();
  for (double s : pooled_scores) {
    if (s < 0.0) throw InvalidInputError("threshold_grid: scores must be nonnegative");
    smax = std::max(smax, s);
    if (s > 0.0) smin_pos = std::min(smin_pos, s);
  }
  if (!(smax > 0.0)) throw InvalidInputError("threshold_grid: all scores are zero");
  if (!std::isfinite(smin_pos)) smin_pos = smax;
  double lo = smin_pos * (1.0 - 1e-9);  // smallest positive score stays above the grid start
  if (lo >= smax) lo = smax / 2.0;
  const std::vector<double> vals = log_spaced(lo, smax, count);
  return Eigen::Map<const Vector>(vals.data(), count);
}

namespace {

std::vector<CurvePoint> roc_pr_impl(const Matrix& score_A, const Matrix& score_B,
                                    const BooleanNetwork& truth, const Vector& grid,
                                    bool parallel) {
  if (score_A.rows() != truth.outputs || score_A.cols() != truth.outputs)
    throw InvalidInputError("roc_pr: score shape mismatch");
  if (static_cast<int>(score_B.cols()) != truth.inputs)
    throw InvalidInputError("roc_pr: input score shape mismatch");
  if ((score_A.array() < 0.0).any() || (score_B.size() > 0 && (score_B.array() < 0.0).any()))
    throw InvalidInputError("roc_pr: scores must be nonnegative");
  const StructureCounts base = structure_metrics(truth, truth);
  const long P = base.tp;
  const long Neg = base.tn;
  if (P == 0 || Neg == 0)
    throw InvalidInputError("roc_pr: truth needs at least one edge and one non-edge");
  const int G = static_cast<int>(grid.size());
  std::vector<CurvePoint> curve(static_cast<size_t>(G));
  auto eval_point = [&](int g) {
    const BooleanNetwork est = boolean_network(score_A, score_B, grid[g]);
    const StructureCounts c = structure_metrics(est, truth);
    CurvePoint pt;
    pt.threshold = grid[g];
    pt.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
    pt.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tp + c.fp > 0)
      pt.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    curve[static_cast<size_t>(g)] = pt;
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int g = 0; g < G; ++g) eval_point(g);
  } else {
    for (int g = 0; g < G; ++g) eval_point(g);
  }
  return curve;
}

}  // namespace

std::vector<CurvePoint> roc_pr(const Matrix& score_A, const Matrix& score_B,
                               const BooleanNetwork& truth, const Vector& grid) {
  return roc_pr_impl(score_A, score_B, truth, grid, true);
}

std::vector<CurvePoint> roc_pr_serial(const Matrix& score_A, const Matrix& score_B,
                                      const BooleanNetwork& truth, const Vector& grid) {
  return roc_pr_impl(score_A, score_B, truth, grid, false);
}

std::optional<double> auc(const std::vector<CurvePoint>& curve) {
  std::vector<std::pair<double, double>> pts;
  for (const CurvePoint& p : curve)
    if (std::isfinite(p.fpr) && std::isfinite(p.tpr)) pts.emplace_back(p.fpr, p.tpr);
  if (pts.size() < 2) return std::nullopt;
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].first - pts[i - 1].first) * 0.5 * (pts[i].second + pts[i - 1].second);
  return area;
}

// ---------------------------------------------------------------------------
// Batch study.

namespace {

Matrix floor_scores(const Matrix& A, double rel) {
  Matrix s = A.cwiseAbs();
  const double cut = rel * s.maxCoeff();
  return (s.array() > cut).select(s, 0.0);
}

DatasetOutcome run_one(const BatchOptions& opt, std::uint64_t seed) {
  DatasetOutcome out;
  out.seed = seed;
  const auto tic = std::chrono::steady_clock::now();
  try {
    ExperimentConfig cfg = opt.config;
    cfg.seed = seed;
    const Dataset ds = make_dataset(cfg);
    // The study ranks drift edges only; inputs act as known excitation and
    // stay out of the curves (the common-mode wave leaves B unidentifiable).
    out.truth_net = boolean_network(ds.truth.A, Matrix(ds.truth.A.rows(), 0), 0.0);
    const RegressionData reg = RegressionData::from_series(ds.series);
    Matrix A0, B0;
    bool log_ok = true;
    initialize(reg, &A0, &B0, &log_ok);
    if (opt.logm_baseline && log_ok) out.score_logm = floor_scores(A0, opt.score_floor_rel);
    SolveReport rep = reconstruct_from(reg, A0, B0, opt.solver);
    out.score_proposed = floor_scores(rep.A, opt.score_floor_rel);
    out.iterations = rep.iterations;
    out.termination = rep.termination;
    out.kkt_violation = rep.kkt_violation;
    out.ok = true;
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
  return out;
}

void aggregate(const std::vector<DatasetOutcome>& outcomes, const Vector& grid, bool baseline,
               MethodAggregate* agg) {
  const int G = static_cast<int>(grid.size());
  std::vector<std::vector<CurvePoint>> curves;
  for (const DatasetOutcome& o : outcomes) {
    if (!o.ok) {
      ++agg->failed;
      continue;
    }
    const Matrix* score = baseline ? (o.score_logm ? &*o.score_logm : nullptr) : &o.score_proposed;
    if (!score) {
      ++agg->failed;
      continue;
    }
    const Matrix empty = Matrix::Zero(o.truth_net.outputs, o.truth_net.inputs);
    curves.push_back(roc_pr_serial(*score, empty, o.truth_net, grid));
    if (auto a = auc(curves.back())) agg->auc_values.push_back(*a);
  }
  agg->curves = static_cast<int>(curves.size());
  agg->per_point_mean.assign(static_cast<size_t>(G), CurvePoint{});
  agg->std_fpr = Vector::Zero(G);
  agg->std_tpr = Vector::Zero(G);
  agg->std_precision = Vector::Zero(G);
  agg->std_recall = Vector::Zero(G);
  agg->min_tpr = Vector::Constant(G, std::numeric_limits<double>::quiet_NaN());
  agg->max_tpr = Vector::Constant(G, std::numeric_limits<double>::quiet_NaN());
  agg->precision_defined.assign(static_cast<size_t>(G), 0);
  if (curves.empty()) return;
  for (int g = 0; g < G; ++g) {
    double sf = 0, sf2 = 0, st = 0, st2 = 0, sp = 0, sp2 = 0;
    int np = 0;
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& c : curves) {
      const CurvePoint& p = c[static_cast<size_t>(g)];
      sf += p.fpr;
      sf2 += p.fpr * p.fpr;
      st += p.tpr;
      st2 += p.tpr * p.tpr;
      mn = std::min(mn, p.tpr);
      mx = std::max(mx, p.tpr);
      if (p.precision) {
        sp += *p.precision;
        sp2 += *p.precision * *p.precision;
        ++np;
      }
    }
    const double K = static_cast<double>(curves.size());
    CurvePoint& m = agg->per_point_mean[static_cast<size_t>(g)];
    m.threshold = grid[g];
    m.fpr = sf / K;
    m.tpr = st / K;
    if (np > 0) m.precision = sp / np;
    agg->precision_defined[static_cast<size_t>(g)] = np;
    auto sdev = [](double s, double s2, double k) {
      if (k < 2.0) return 0.0;
      const double v = (s2 - s * s / k) / (k - 1.0);
      return v > 0.0 ? std::sqrt(v) : 0.0;
    };
    agg->std_fpr[g] = sdev(sf, sf2, K);
    agg->std_tpr[g] = sdev(st, st2, K);
    agg->std_recall[g] = agg->std_tpr[g];
    agg->std_precision[g] = np > 0 ? sdev(sp, sp2, static_cast<double>(np)) : 0.0;
    agg->min_tpr[g] = mn;
    agg->max_tpr[g] = mx;
  }
  if (!agg->auc_values.empty()) {
    double s = 0, s2 = 0;
    for (double a : agg->auc_values) {
      s += a;
      s2 += a * a;
    }
    const double K = static_cast<double>(agg->auc_values.size());
    agg->mean_auc = s / K;
    agg->std_auc = K >= 2.0 ? std::sqrt(std::max(0.0, (s2 - s * s / K) / (K - 1.0))) : 0.0;
  }
}

BatchReport run_batch_impl(const BatchOptions& opt, bool parallel) {
  if (opt.systems < 1) throw InvalidInputError("run_batch: need at least one system");
  if (opt.grid_points < 2) throw InvalidInputError("run_batch: need at least two grid points");
  opt.config.validate();
  const auto tic = std::chrono::steady_clock::now();
  BatchReport rep;
  rep.master_seed = opt.master_seed;
  rep.outcomes.resize(static_cast<size_t>(opt.systems));
  std::vector<std::uint64_t> seeds(static_cast<size_t>(opt.systems));
  {
    Rng master(opt.master_seed);
    for (int i = 0; i < opt.systems; ++i) seeds[static_cast<size_t>(i)] = master.substream(
        static_cast<std::uint64_t>(i)).seed();
  }
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < opt.systems; ++i)
      rep.outcomes[static_cast<size_t>(i)] = run_one(opt, seeds[static_cast<size_t>(i)]);
  } else {
    for (int i = 0; i < opt.systems; ++i)
      rep.outcomes[static_cast<size_t>(i)] = run_one(opt, seeds[static_cast<size_t>(i)]);
  }
  // pooled positive scores over both methods fix the shared grid
  std::vector<double> pooled;
  for (const DatasetOutcome& o : rep.outcomes) {
    if (!o.ok) continue;
    for (Eigen::Index k = 0; k < o.score_proposed.size(); ++k)
      if (o.score_proposed(k) > 0.0) pooled.push_back(o.score_proposed(k));
    if (o.score_logm)
      for (Eigen::Index k = 0; k < o.score_logm->size(); ++k)
        if ((*o.score_logm)(k) > 0.0) pooled.push_back((*o.score_logm)(k));
  }
  if (pooled.empty()) throw SolverError("run_batch: every dataset failed");
  rep.grid = threshold_grid(pooled, opt.grid_points);
  aggregate(rep.outcomes, rep.grid, false, &rep.proposed);
  if (opt.logm_baseline) aggregate(rep.outcomes, rep.grid, true, &rep.baseline);
  for (DatasetOutcome& o : rep.outcomes) {
    if (!o.ok) continue;
    const Matrix empty = Matrix::Zero(o.truth_net.outputs, o.truth_net.inputs);
    o.auc_proposed = auc(roc_pr_serial(o.score_proposed, empty, o.truth_net, rep.grid));
    if (o.score_logm) o.auc_logm = auc(roc_pr_serial(*o.score_logm, empty, o.truth_net, rep.grid));
  }
  rep.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
  return rep;
}

}  // namespace

BatchReport run_batch(const BatchOptions& opt) { return run_batch_impl(opt, true); }

BatchReport run_batch_serial(const BatchOptions& opt) { return run_batch_impl(opt, false); }

}  // namespace ctnet
