#pragma once

// Frozen reference values. Regenerate only if the definition changes, never
// to make a test pass.

namespace oracle {

// N=3, gamma=1, m=2, T=1: V = W^m of Delta(W^m) = rho W / (T(m-1)), W(0) = beta.
// Adaptive DOP853 integration of (y^2 V')' = y V^{1/2} from a two-term series
// start at y = 1e-8, rtol 1e-13.
inline constexpr double kProfileRadii[] = {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0};
inline constexpr double kProfileBetaHalf[] = {0.252504164935, 0.275414972566, 0.540259745789,
                                              6.31717517276,  332.496603433,  28818.7232123};
inline constexpr double kProfileBetaOne[] = {1.0050041658,  1.05041580928, 1.54089195575,
                                             9.73809668887, 370.276887881, 29479.9095746};
inline constexpr double kProfileBetaTwo[] = {4.01000416623, 4.10041623533, 5.04125770534,
                                             17.8863983493, 438.14230795,  30575.6942633};

// Explicit family at N=3, gamma=1, m=2, a=1, b=1/6 (hand substitution):
// lambda1 = 2/3, kappa = 2/3, T = 1, coefficient = 1/6.
inline constexpr double kLambda1 = 2.0 / 3.0;
inline constexpr double kTheta = 0.5;
inline constexpr double kKappa = 2.0 / 3.0;
inline constexpr double kBlowupT = 1.0;
inline constexpr double kFamilyCoefficient = 1.0 / 6.0;

// rho-mass of B_R for rho = |x|^{-1}, N = 3: 2 pi R^2.
inline constexpr double kPi = 3.14159265358979323846;

}  // namespace oracle
