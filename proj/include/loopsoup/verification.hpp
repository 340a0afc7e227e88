#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsoup/observables.hpp"
#include "loopsoup/quantum_oracle.hpp"

namespace loopsoup {

/// Monte Carlo side of an oracle comparison. Either part may be absent.
struct McSummary {
  RunEcho echo;
  std::optional<EstimatorResult> weight;  // direct estimate of Z~
  std::optional<ObservableResults> chain;
};

struct IdentityCheck {
  std::string name;
  double oracle = 0.0;
  double mc = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::string graph;
  double u = 0.0;
  double beta = 0.0;
  std::vector<IdentityCheck> rows;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return !rows.empty();
  }
};

namespace detail {

inline IdentityCheck compare(std::string name, double oracle, double mc, double se, double sigmas) {
  const double z = z_score(mc, oracle, se);
  return {std::move(name), oracle, mc, se, z, z <= sigmas};
}

inline std::string pair_tag(Vertex x, Vertex y) { return "(" + std::to_string(x) + "," + std::to_string(y) + ")"; }

}  // namespace detail

/// Side-by-side oracle vs loop estimates:
///  - Z~ against exp(-beta|E|/2) Tr exp(-beta H);
///  - P(same loop)/4 against <S3S3> and <S1S1>, (P(E+)-P(E-))/4 against <S2S2>;
///  - |<S2S2>| <= <S3S3>, equality iff u = +-1 (oracle and loop side);
///  - vertex-averaged loop fraction against the eta-curvature;
///  - the loop-fraction sandwich.
inline VerificationReport verify_identities(const Graph& g, double u, double beta, const McSummary& mc, double sigmas = 3.0) {
  if (mc.echo.graph != g.spec() || mc.echo.u != u || mc.echo.beta != beta)
    throw std::invalid_argument("verify_identities: Monte Carlo parameters do not match (" + mc.echo.graph + ", u=" +
                                std::to_string(mc.echo.u) + ", beta=" + std::to_string(mc.echo.beta) + ")");
  VerificationReport report{g.spec(), u, beta, {}};
  const SpinOperator h = build_hamiltonian(g, u);
  const bool extreme = u == 1.0 || u == -1.0;

  if (mc.weight) {
    report.rows.push_back(detail::compare("partition_function", loop_partition_function(h, g, beta), mc.weight->mean,
                                          mc.weight->std_error, sigmas));
  }
  if (!mc.chain) return report;
  const ObservableResults& obs = *mc.chain;
  const ThermalState state(h, beta);

  for (const auto& [pair, same] : obs.same_loop) {
    const auto [x, y] = pair;
    const auto tag = detail::pair_tag(x, y);
    const auto& dir = obs.direction.at(pair);
    const double s3 = state.correlation(x, y, 3);
    const double s1 = state.correlation(x, y, 1);
    const double s2 = state.correlation(x, y, 2);
    report.rows.push_back(detail::compare("S3S3" + tag, s3, same.mean / 4, same.std_error / 4, sigmas));
    report.rows.push_back(detail::compare("S1S1" + tag, s1, same.mean / 4, same.std_error / 4, sigmas));
    report.rows.push_back(detail::compare("S2S2" + tag, s2, dir.mean / 4, dir.std_error / 4, sigmas));

    IdentityCheck exact{"oracle_inequality" + tag, s3 - std::abs(s2), 0.0, 0.0, 0.0, false};
    exact.pass = extreme ? std::abs(s3 - std::abs(s2)) <= 1e-12 : s3 - std::abs(s2) > 1e-12;
    report.rows.push_back(exact);

    // Loop side: |P(E+)-P(E-)| <= P(same), with equality at u = +-1.
    const double excess = std::abs(dir.mean) - same.mean;
    const double se = std::sqrt(dir.std_error * dir.std_error + same.std_error * same.std_error);
    IdentityCheck loop{"loop_inequality" + tag, 0.0, excess, se, se > 0 ? excess / se : 0.0, false};
    loop.pass = extreme ? z_score(excess, 0.0, se) <= sigmas : excess <= sigmas * se + 1e-12;
    report.rows.push_back(loop);
  }

  report.rows.push_back(detail::compare("loop_fraction_vs_curvature", susceptibility_curvature(h, g, beta),
                                        obs.averaged_fraction.mean, obs.averaged_fraction.std_error, sigmas));

  const SandwichReport sw = obs.check_sandwich();
  report.rows.push_back({"sandwich_upper", 0.0, sw.gap.mean, sw.gap.std_error, 0.0, sw.upper_holds});
  report.rows.push_back({"sandwich_lower", sw.slack, sw.gap.mean, sw.gap.std_error, 0.0, sw.lower_holds});
  if (u == 1.0) report.rows.push_back({"sandwich_equality", 0.0, sw.gap.mean, sw.gap.std_error, 0.0, sw.equality_holds});
  return report;
}

}  // namespace loopsoup
