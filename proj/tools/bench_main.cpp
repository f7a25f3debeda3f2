// Compares the OpenMP kernels against their serial reference twins and
// checks that both produce identical results.
#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include "ctnet/aliasing.hpp"
#include "ctnet/evalharness.hpp"
#include "ctnet/matfun.hpp"
#include "ctnet/rng.hpp"
#include "ctnet/simulate.hpp"

using namespace ctnet;
using Clock = std::chrono::steady_clock;

namespace {

double time_of(const std::function<void()>& f, int reps) {
  f();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) f();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const char* name, double serial_ms, double parallel_ms, double diff) {
  std::printf("%-22s %10.3f ms %10.3f ms %8.2fx   max|diff| = %.3g\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  Rng rng(7);

  {  // sk_integral on a dense stable 24x24 drift
    const int n = 24;
    Matrix A(n, n);
    for (int i = 0; i < n * n; ++i) A.data()[i] = rng.normal() * 0.3;
    A.diagonal().array() -= 2.0;
    Matrix Ks, Kp;
    const double ts = time_of([&] { Ks = sk_integral_serial(1.0, A); }, 3);
    const double tp = time_of([&] { Kp = sk_integral(1.0, A); }, 3);
    row("sk_integral n=24", ts, tp, (Ks - Kp).cwiseAbs().maxCoeff());
  }

  {  // alias enumeration with a wide norm ball -> many candidates
    const int n = 8;
    Matrix A = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, i) = -0.5 - 0.05 * i;
    for (int i = 0; i + 1 < n; i += 2) {
      A(i, i + 1) = 2.5 + 0.3 * i;
      A(i + 1, i) = -(2.5 + 0.3 * i);
    }
    const double h = 1.0;
    const Matrix Ad = expm(h * A);
    const double kappa = 40.0;
    AliasSet ss, sp;
    const double ts = time_of([&] { ss = enumerate_aliases_serial(Ad, h, kappa); }, 2);
    const double tp = time_of([&] { sp = enumerate_aliases(Ad, h, kappa); }, 2);
    double diff = static_cast<double>(ss.members.size() != sp.members.size());
    if (diff == 0.0)
      for (size_t i = 0; i < ss.members.size(); ++i)
        diff = std::max(diff, (ss.members[i].A - sp.members[i].A).cwiseAbs().maxCoeff());
    char label[48];
    std::snprintf(label, sizeof label, "alias_enum |S|=%zu", ss.members.size());
    row(label, ts, tp, diff);
  }

  {  // classification curve sweep
    const int n = 48;
    Matrix S(n, n);
    for (int i = 0; i < n * n; ++i) S.data()[i] = std::abs(rng.normal());
    Rng r2(8);
    Matrix T(n, n);
    for (int i = 0; i < n * n; ++i) T.data()[i] = r2.bernoulli(0.1) ? 1.0 : 0.0;
    const BooleanNetwork truth = boolean_network(T, Matrix(n, 0), 0.5);
    std::vector<double> pooled(S.data(), S.data() + S.size());
    const Vector grid = threshold_grid(pooled, 2001);
    std::vector<CurvePoint> cs, cp;
    const Matrix noB(n, 0);
    const double ts = time_of([&] { cs = roc_pr_serial(S, noB, truth, grid); }, 5);
    const double tp = time_of([&] { cp = roc_pr(S, noB, truth, grid); }, 5);
    double diff = static_cast<double>(cs.size() != cp.size());
    if (diff == 0.0)
      for (size_t i = 0; i < cs.size(); ++i) {
        diff = std::max(diff, std::abs(cs[i].fpr - cp[i].fpr));
        diff = std::max(diff, std::abs(cs[i].tpr - cp[i].tpr));
      }
    row("roc_pr 2001 pts", ts, tp, diff);
  }

  {  // end-to-end mini batch
    BatchOptions opt;
    opt.systems = 4;
    opt.config.n = 8;
    opt.config.transitions = 16;
    opt.solver.lambda = 0.02;
    opt.solver.max_iter = 8;
    opt.master_seed = 11;
    BatchReport bs, bp;
    const double ts = time_of([&] { bs = run_batch_serial(opt); }, 1);
    const double tp = time_of([&] { bp = run_batch(opt); }, 1);
    double diff = 0.0;
    for (size_t i = 0; i < bs.outcomes.size(); ++i)
      if (bs.outcomes[i].ok && bp.outcomes[i].ok)
        diff = std::max(diff, (bs.outcomes[i].score_proposed - bp.outcomes[i].score_proposed)
                                  .cwiseAbs()
                                  .maxCoeff());
    row("run_batch 4x(n=8)", ts, tp, diff);
  }

  return 0;
}
