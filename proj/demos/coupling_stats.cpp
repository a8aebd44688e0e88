// Couple G(n, m) to G(n, p) conditioned on the edge-density window and look
// at how many single-direction edits bridge the two draws.

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "graphldp/randgraph.hpp"

using namespace graphldp;

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 100;
  int trials = argc > 2 ? std::atoi(argv[2]) : 2000;
  long long m = pair_count(n) / 2;
  double p = 0.5, eta = 0.05;

  long long adds = 0, dels = 0, max_xor = 0;
  double mean_xor = 0;
  std::vector<long long> hist(6, 0);  // |d| in [0,50), [50,100), ...
  for (int t = 0; t < trials; ++t) {
    CouplingTrace tr = couple(n, m, p, eta, (std::uint64_t)t + 1);
    if (tr.added_only && tr.xor_size > 0) ++adds;
    if (tr.deleted_only && tr.xor_size > 0) ++dels;
    mean_xor += (double)tr.xor_size / trials;
    max_xor = std::max(max_xor, tr.xor_size);
    std::size_t bin = std::min<std::size_t>(hist.size() - 1, (std::size_t)(tr.xor_size / 50));
    ++hist[bin];
  }

  std::printf("n=%d m=%lld p=%.2f eta=%.2f, %d couplings\n", n, m, p, eta, trials);
  std::printf("edits: add-only %lld, delete-only %lld, mean |xor| %.1f, max %lld\n",
              adds, dels, mean_xor, max_xor);
  for (std::size_t b = 0; b < hist.size(); ++b)
    std::printf("  |xor| in [%3zu,%3zu): %lld\n", 50 * b, 50 * (b + 1), hist[b]);
  return 0;
}
