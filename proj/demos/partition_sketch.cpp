// Weak regularity partition of a random graph, with the motif transfer bound
// it certifies.

#include <cstdio>
#include <cstdlib>

#include "graphldp/regularity.hpp"

using namespace graphldp;

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 120;
  double p = argc > 2 ? std::atof(argv[2]) : 0.3;
  double eps = argc > 3 ? std::atof(argv[3]) : 0.12;

  FiniteGraph g = sample_gnp(n, p, 42);
  RegularityResult reg = weak_regularity(g, eps);
  std::printf("G(%d, %.2f), eps=%.2f: %d parts after %d rounds, %s "
              "(largest residual cut found: %.4f)\n",
              n, p, eps, reg.partition.size(), reg.rounds,
              reg.certified ? "certified" : "not certified", reg.final_violation);

  for (const Motif& h : {Motif::triangle(), Motif::cycle(4)}) {
    CountingCheck chk = counting_check(g, reg.partition, h, eps);
    std::printf("%-9s t_graph=%.5f t_quotient=%.5f |diff|=%.5f bound=%.5f %s\n",
                h.name.c_str(), chk.t_graph, chk.t_quotient,
                std::fabs(chk.t_graph - chk.t_quotient), chk.bound,
                chk.ok ? "ok" : "VIOLATED");
  }
  return 0;
}
