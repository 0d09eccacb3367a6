#ifndef STREE_SPECIAL_FUNCTIONS_HPP
#define STREE_SPECIAL_FUNCTIONS_HPP

namespace stree {

/// I_nu(z) carried as e^{-z} I_nu(z) and log I_nu(z).
struct BesselEval {
  double nu = 0.0;
  double z = 0.0;
  double scaled_value = 0.0;  ///< e^{-z} I_nu(z), in (0, 1] for z > 0
  double log_value = 0.0;     ///< log I_nu(z)
};

enum class BesselBranch { Series, Hankel, Debye };

/// Branch chosen for (nu, z): Hankel for z >= max(30, nu^2/2), Debye for
/// nu > 60 below that seam, otherwise the power series summed in log space.
BesselBranch bessel_branch(double nu, double z);

/// Modified Bessel function of the first kind, overflow-safe.
/// Throws DomainError for nu < 0 or z < 0.
BesselEval bessel_i_scaled(double nu, double z);

/// The uniform upper bound I_nu(z) <= C z^{-1/2} e^z.
bool check_ileq(double nu, double z, double C = 1.0);

/// log of e^{sqrt(nu^2+z^2)} (z / (nu + sqrt(nu^2+z^2)))^nu / sqrt(z + nu).
double log_iequiv_envelope(double nu, double z);

/// I_nu(z) divided by the two-sided envelope above (nu >= 1, z > 0).
double check_iequiv(double nu, double z);

/// I_nu(z) / (z^{-1/2} e^z) in the regime z > max(1, a nu^2), nu >= 1, 0 < a < 1.
/// Throws DomainError outside that regime.
double check_ieq(double nu, double z, double a);

}  // namespace stree

#endif  // STREE_SPECIAL_FUNCTIONS_HPP
