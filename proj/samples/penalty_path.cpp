// Follows the penalized solution of the QB instance as epsilon shrinks and
// compares it with the brute-force three-level value.

#include <algorithm>
#include <cstdio>

#include "bilevel/bilevel.hpp"

int main() {
  using namespace bilevel;
  const BilevelProblem qb = registry_get("QB");
  const ContinuationTrace trace = run_continuation(qb, EpsSchedule{0.1, 0.5, 8}, Sign::pessimistic, UpperConfig{});
  const OracleSolution oracle = solve_three_level(qb, 1e-2);

  std::printf("%12s %10s %12s %12s\n", "epsilon", "y", "v", "gap");
  for (const GapRow& g : gap_table(oracle, trace)) {
    const auto& row = *std::find_if(trace.rows.begin(), trace.rows.end(),
                                    [&](const TraceRow& r) { return r.epsilon == g.epsilon; });
    std::printf("%12.4e %10.6f %12.8f %12.4e\n", g.epsilon, row.y(0), row.v, g.gap);
  }
  const LimitEstimate lim = limit_estimate(trace);
  std::printf("three-level value %.6f, extrapolated limit %.6f\n", oracle.beta_star, lim.v_limit);
  return 0;
}
