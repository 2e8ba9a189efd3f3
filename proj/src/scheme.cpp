#include "curvebound/scheme.hpp"

#include <algorithm>
#include <cmath>

namespace curvebound {

void validate_scheme(const Manifold& m, std::size_t n_curves, const Scheme& s) {
  std::visit(
      [&](const auto& sch) {
        using T = std::decay_t<decltype(sch)>;
        if constexpr (std::is_same_v<T, BoundState3D>) {
          if (m.dimension() != 3)
            throw SchemeError("bound-state scheme requires a 3-dimensional backend");
          if (sch.nu.size() != n_curves)
            throw SchemeError("one binding wavenumber per curve is required");
          for (double nu : sch.nu)
            if (!(nu > 0.0)) throw SchemeError("binding wavenumbers must be positive");
        } else if constexpr (std::is_same_v<T, Finite2D>) {
          if (m.dimension() != 2)
            throw SchemeError("two-dimensional scheme requires the plane backend");
          if (sch.lambda.size() != n_curves)
            throw SchemeError("one coupling per curve is required");
          for (double l : sch.lambda)
            if (!(l > 0.0)) throw SchemeError("couplings must be positive");
        } else if constexpr (std::is_same_v<T, RGSubtracted>) {
          if (m.kind != ManifoldKind::EuclideanSpace3)
            throw SchemeError("subtracted scheme is restricted to flat 3-space");
          if (n_curves != 1)
            throw SchemeError("subtracted scheme works with a single curve");
          if (!(sch.mu > 0.0)) throw SchemeError("reference scale must be positive");
        } else if constexpr (std::is_same_v<T, Regularized>) {
          if (!(sch.eps > 0.0)) throw SchemeError("time cutoff must be positive");
          if (!(sch.mu > 0.0)) throw SchemeError("reference scale must be positive");
        }
      },
      s);
}

double scheme_energy_ceiling(const Scheme& s) {
  return std::visit(
      [](const auto& sch) -> double {
        using T = std::decay_t<decltype(sch)>;
        if constexpr (std::is_same_v<T, BoundState3D>) {
          double numax = *std::max_element(sch.nu.begin(), sch.nu.end());
          return -numax * numax;
        } else {
          return 0.0;  // approached from below
        }
      },
      s);
}

const char* scheme_name(const Scheme& s) {
  return std::visit(
      [](const auto& sch) -> const char* {
        using T = std::decay_t<decltype(sch)>;
        if constexpr (std::is_same_v<T, BoundState3D>) return "bound_state";
        else if constexpr (std::is_same_v<T, Finite2D>) return "finite2d";
        else if constexpr (std::is_same_v<T, RGSubtracted>) return "rg_subtracted";
        else return "regularized";
      },
      s);
}

}  // namespace curvebound
