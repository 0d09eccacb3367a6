#ifndef STREE_CALIBRATION_HPP
#define STREE_CALIBRATION_HPP

// Frozen bands for the comparability checks. Each band was measured once on the
// stated grid and widened by at least a factor 2 on both sides.

namespace stree::calibration {

// h_t(n) / envelope, q in {2, 3}, t in [0.5, 50], n in [0, 40]: observed [2.15, 8.70].
inline constexpr double kHeatLo = 1.0;
inline constexpr double kHeatHi = 18.0;

// eta / envelope over check_eta_envelopes' grid, alpha in {0.5, 1, 1.5}.
// inner observed [0.157, 0.467], outer [0.107, 0.376].
inline constexpr double kEtaInnerLo = 0.05;
inline constexpr double kEtaInnerHi = 1.0;
inline constexpr double kEtaOuterLo = 0.05;
inline constexpr double kEtaOuterHi = 1.0;

// Stable kernel ratio bands, q in {2, 3}, alpha in {0.5, 1, 1.5}, K = M = 1.
// inner observed [0.405, 2.55], outer [0.130, 0.365].
inline constexpr double kKernelInnerLo = 0.2;
inline constexpr double kKernelInnerHi = 5.0;
inline constexpr double kKernelOuterLo = 0.06;
inline constexpr double kKernelOuterHi = 0.8;

// P[|X_t| > r] / (t r^{-alpha/2}), q = 2, alpha = 1, t = 0.5, r in [4, 20]: observed [0.330, 0.364].
inline constexpr double kTailLo = 0.15;
inline constexpr double kTailHi = 0.8;

// E tau / r^{alpha/2}, q = 2, alpha = 1, r in [4, 12]: observed [1.872, 1.915].
inline constexpr double kExitLo = 0.9;
inline constexpr double kExitHi = 4.0;

// Poisson kernel constants, q = 2, alpha = 1, r in {2, 3, 4}: upper ratio <= 0.0243, lower ratio >= 25.6.
inline constexpr double kPoissonUpper = 0.05;
inline constexpr double kPoissonLower = 10.0;

}  // namespace stree::calibration

#endif  // STREE_CALIBRATION_HPP
