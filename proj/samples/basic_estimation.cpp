// Estimates one random sparse channel with every method and prints the
// squared error of each.
#include <sparsechan/experiments.hpp>

#include <cstdio>

int main() {
  using namespace sparsechan;
  const SparseChannel h = generate_sparse_channel(60, 4, 7);
  const ToeplitzTraining x = build_toeplitz_training(30, 60, ProbeDistribution::gaussian, 11);
  const Observation obs = observe(x, h, 20.0, 13);

  EstimatorConfig cfg;
  for (Method m : kAllMethods) {
    const Estimate est = run_estimator(m, x, obs, cfg, &h.support);
    std::printf("%-7s mse = %.3e  support size = %zu\n", std::string(to_string(m)).c_str(),
                mse(h, est), est.support_hat.size());
  }
}
