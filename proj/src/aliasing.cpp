#include "ctnet/aliasing.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <omp.h>

#include "ctnet/errors.hpp"
#include "ctnet/stats.hpp"

namespace ctnet {

SamplingBound sampling_bound(const Matrix& A) {
  const CVector lam = eigenvalues_raw(A);
  SamplingBound b;
  b.max_abs_imag = lam.imag().cwiseAbs().maxCoeff();
  if (b.max_abs_imag == 0.0) {
    b.omega_min = 0.0;
    b.h_max = std::numeric_limits<double>::infinity();
  } else {
    b.omega_min = 2.0 * b.max_abs_imag;
    b.h_max = M_PI / b.max_abs_imag;
  }
  return b;
}

bool in_strip(const Matrix& A, double h) {
  if (!(h > 0.0)) throw InvalidInputError("in_strip: h must be positive");
  return sampling_bound(A).max_abs_imag < M_PI / h;
}

AliasTestReport alias_test(const CTSystem& model, double h1, const TimeSeries& probe,
                           double alpha) {
  model.validate();
  probe.validate();
  if (!(h1 > 0.0)) throw InvalidInputError("alias_test: h1 must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInputError("alias_test: alpha must lie in (0,1)");
  if (probe.n() != model.n()) throw InvalidInputError("alias_test: probe dimension mismatch");
  const int N2 = probe.transitions();
  if (N2 < 5) throw InvalidProbeError("alias_test: probe needs at least 5 transitions");
  const double h2 = probe.h;
  const double ratio = h2 / h1;
  const double nearest = std::round(ratio);
  if (nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio))
    throw InvalidProbeError("alias_test: h2/h1 is an integer, aliases are indistinguishable");
  const int n = model.n();
  const bool with_input = model.m() > 0 && probe.m() > 0;
  if (with_input && probe.m() != model.m())
    throw InvalidInputError("alias_test: input dimension mismatch");
  const Matrix Ad2 = expm(h2 * model.A);
  Matrix Bd2;
  if (with_input) Bd2 = phi_integral(h2, model.A) * model.B;
  AliasTestReport rep;
  rep.h1 = h1;
  rep.h2 = h2;
  rep.alpha = alpha;
  rep.errors.resize(n, N2);
  for (int k = 1; k <= N2; ++k) {
    Vector pred = Ad2 * probe.Y.col(k - 1);
    if (with_input) pred += Bd2 * probe.U.col(k - 1);
    rep.errors.col(k - 1) = probe.Y.col(k) - pred;
  }
  rep.per_channel_p.resize(n);
  rep.per_channel_t.resize(n);
  double pmin = 1.0;
  for (int i = 0; i < n; ++i) {
    double t = 0.0;
    rep.per_channel_p[i] = t_test_zero_mean(rep.errors.row(i).transpose(), &t);
    rep.per_channel_t[i] = t;
    pmin = std::min(pmin, rep.per_channel_p[i]);
  }
  rep.p_value = std::min(1.0, n * pmin);  // Bonferroni
  rep.reject = rep.p_value < alpha;
  return rep;
}

// ---------------------------------------------------------------------------
// Enumeration.

namespace {

struct EnumSetup {
  CMatrix Z, Zinv;
  CVector lam;      // eigenvalues of Ad
  CVector log0;     // principal logs
  Vector beta;      // Im(log0)/pi
  Vector alpha;     // Re(log0)
  std::vector<int> free_idx;      // one index per conjugate pair (positive imag) or none
  std::vector<int> partner;       // partner[k] = conjugate index, or k for real
  std::vector<long> lo, hi;       // box ranges per free index
  long count = 1;                  // product of box sizes
  double kappa_log2 = 0.0;
};

EnumSetup prepare_enumeration(const Matrix& Ad, double h, double kappa) {
  if (Ad.rows() != Ad.cols() || Ad.rows() < 1)
    throw InvalidInputError("enumerate_aliases: Ad must be square");
  if (!Ad.allFinite()) throw InvalidInputError("enumerate_aliases: non-finite entries");
  if (!(h > 0.0)) throw InvalidInputError("enumerate_aliases: h must be positive");
  if (!(kappa > 0.0)) throw InvalidInputError("enumerate_aliases: kappa must be positive");
  const Eigen::Index n = Ad.rows();
  Eigen::EigenSolver<Matrix> es(Ad);
  if (es.info() != Eigen::Success) throw NumericError("enumerate_aliases: eigensolver failed");
  EnumSetup s;
  s.lam = es.eigenvalues();
  s.Z = es.eigenvectors();
  const double scale = std::max(1.0, s.lam.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(s.lam[i]) < 1e-12 * scale)
      throw InvalidInputError("enumerate_aliases: Ad is singular, no logarithm exists");
    if (std::abs(s.lam[i].imag()) < 1e-10 && s.lam[i].real() < 0.0)
      throw BranchCutError("enumerate_aliases: eigenvalue on the negative real axis");
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = i + 1; k < n; ++k)
      if (std::abs(s.lam[i] - s.lam[k]) < 1e-6)
        throw DegenerateSpectrumError(
            "enumerate_aliases: eigenvalue gap below 1e-6, enumeration unsupported");
  s.Zinv = Eigen::PartialPivLU<CMatrix>(s.Z).solve(CMatrix::Identity(n, n));
  s.log0.resize(n);
  s.beta.resize(n);
  s.alpha.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.log0[i] = std::log(s.lam[i]);
    s.alpha[i] = s.log0[i].real();
    s.beta[i] = s.log0[i].imag() / M_PI;
  }
  // conjugate pairing; gap test above guarantees clean separation
  s.partner.assign(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(s.lam[i].imag()) < 5e-7) {
      s.partner[i] = static_cast<int>(i);  // real eigenvalue, branch fixed at 0
      continue;
    }
    if (s.partner[i] >= 0) continue;
    int best = -1;
    double bestd = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == i || s.partner[k] >= 0) continue;
      const double d = std::abs(s.lam[k] - std::conj(s.lam[i]));
      if (d < bestd) {
        bestd = d;
        best = static_cast<int>(k);
      }
    }
    if (best < 0 || bestd > 1e-8 * scale)
      throw NumericError("enumerate_aliases: could not pair conjugate eigenvalues");
    s.partner[i] = best;
    s.partner[best] = static_cast<int>(i);
    s.free_idx.push_back(s.lam[i].imag() > 0.0 ? static_cast<int>(i) : best);
  }
  const double kappa_log = h * kappa;
  s.kappa_log2 = kappa_log * kappa_log;
  // box bound: pi^2 (beta_k + 2 j_k)^2 <= kappa_log^2 - sum alpha^2 for each k
  const double H = (s.kappa_log2 - s.alpha.squaredNorm()) / (4.0 * M_PI * M_PI);
  for (int k : s.free_idx) {
    if (H < 0.0) {
      s.lo.push_back(0);
      s.hi.push_back(-1);  // empty
      s.count = 0;
      continue;
    }
    const double half = std::sqrt(H);
    const double center = -0.5 * s.beta[k];
    const long lo = static_cast<long>(std::ceil(center - half - 1e-12));
    const long hi = static_cast<long>(std::floor(center + half + 1e-12));
    s.lo.push_back(lo);
    s.hi.push_back(hi);
    if (s.count > 0) {
      const long w = hi - lo + 1;
      if (w <= 0) {
        s.count = 0;
      } else {
        if (s.count > 20000000L / w)
          throw SolverError("enumerate_aliases: candidate box too large, reduce kappa");
        s.count *= w;
      }
    }
  }
  if (s.free_idx.empty()) s.count = 1;  // only the principal candidate
  return s;
}

std::optional<AliasMember> evaluate_candidate(const EnumSetup& s, double h, long linear) {
  const Eigen::Index n = s.lam.size();
  Eigen::VectorXi j = Eigen::VectorXi::Zero(n);
  long rem = linear;
  for (size_t f = 0; f < s.free_idx.size(); ++f) {
    const long w = s.hi[f] - s.lo[f] + 1;
    const long v = s.lo[f] + rem % w;
    rem /= w;
    j[s.free_idx[f]] = static_cast<int>(v);
    j[s.partner[s.free_idx[f]]] = static_cast<int>(-v);
  }
  double norm2 = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double im = M_PI * (s.beta[k] + 2.0 * j[k]);
    norm2 += s.alpha[k] * s.alpha[k] + im * im;
  }
  if (norm2 > s.kappa_log2 * (1.0 + 1e-9)) return std::nullopt;
  CVector L(n);
  for (Eigen::Index k = 0; k < n; ++k)
    L[k] = s.log0[k] + std::complex<double>(0.0, 2.0 * M_PI * j[k]);
  const CMatrix hA = s.Z * L.asDiagonal() * s.Zinv;
  const double re_scale = std::max(1.0, hA.real().cwiseAbs().maxCoeff());
  if (hA.imag().cwiseAbs().maxCoeff() > 1e-8 * re_scale) return std::nullopt;  // not real
  AliasMember m;
  m.A = hA.real() / h;
  m.j = j;
  m.weighted_norm = std::sqrt(norm2) / h;
  return m;
}

bool lex_less(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

AliasSet enumerate_impl(const Matrix& Ad, double h, double kappa, bool parallel) {
  EnumSetup s = prepare_enumeration(Ad, h, kappa);
  AliasSet out;
  out.h = h;
  out.kappa = kappa;
  out.Z = s.Z;
  out.log_principal = s.log0;
  out.beta = s.beta;
  std::vector<std::optional<AliasMember>> cand(static_cast<size_t>(s.count));
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long c = 0; c < s.count; ++c) cand[static_cast<size_t>(c)] = evaluate_candidate(s, h, c);
  } else {
    for (long c = 0; c < s.count; ++c) cand[static_cast<size_t>(c)] = evaluate_candidate(s, h, c);
  }
  for (auto& c : cand)
    if (c) out.members.push_back(std::move(*c));
  for (auto& m : out.members) m.exp_residual = (expm(h * m.A) - Ad).norm();
  std::sort(out.members.begin(), out.members.end(), [](const AliasMember& a, const AliasMember& b) {
    if (a.weighted_norm != b.weighted_norm) return a.weighted_norm < b.weighted_norm;
    return lex_less(a.j, b.j);
  });
  return out;
}

}  // namespace

AliasSet enumerate_aliases(const Matrix& Ad, double h, double kappa) {
  return enumerate_impl(Ad, h, kappa, true);
}

AliasSet enumerate_aliases_serial(const Matrix& Ad, double h, double kappa) {
  return enumerate_impl(Ad, h, kappa, false);
}

const AliasMember& sparsest_alias(const AliasSet& set, double zero_tol) {
  if (set.members.empty()) throw InvalidInputError("sparsest_alias: empty alias set");
  if (zero_tol < 0.0) throw InvalidInputError("sparsest_alias: zero_tol must be >= 0");
  const AliasMember* best = nullptr;
  long best_nnz = 0;
  for (const AliasMember& m : set.members) {
    const long nnz = (m.A.cwiseAbs().array() > zero_tol).count();
    if (!best || nnz < best_nnz ||
        (nnz == best_nnz && (m.weighted_norm < best->weighted_norm ||
                             (m.weighted_norm == best->weighted_norm && lex_less(m.j, best->j))))) {
      best = &m;
      best_nnz = nnz;
    }
  }
  return *best;
}

double branch_gap(const Vector& beta, const std::vector<int>& multiplicities,
                  const Eigen::VectorXi& j, const Eigen::VectorXi& delta) {
  const Eigen::Index K = beta.size();
  if (static_cast<Eigen::Index>(multiplicities.size()) != K || j.size() != K || delta.size() != K)
    throw InvalidInputError("branch_gap: argument length mismatch");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double m = static_cast<double>(multiplicities[k]);
    const double d = static_cast<double>(delta[k]);
    acc += m * d * d + m * (2.0 * j[k] + beta[k]) * d;
  }
  return acc;
}

}  // namespace ctnet
