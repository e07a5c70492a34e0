#pragma once

#include "hybridmg/basis.hpp"

#include <map>
#include <string>
#include <vector>

namespace hybridmg {

/// -div(K grad q) = f in the domain, q = g_D on the boundary.
struct ProblemSpec {
    TensorField K;
    ScalarField f;
    ScalarField dirichlet;
    ScalarField exact;  // optional
    ScalarField kappa;  // optional scalar used by kappa-scaled stabilization; defaults to trace(K)/2

    double kappa_at(const Eigen::Vector2d& x) const { return kappa ? kappa(x) : 0.5 * K(x).trace(); }
};

/// Isotropic problem K = kappa I.
ProblemSpec scalar_problem(ScalarField kappa, ScalarField f, ScalarField dirichlet, ScalarField exact = {});

enum class Scheme { HDG, NIPG, IIPG, SIPG, RT };

/// s_f in the interior-penalty family: -1 NIPG, 0 IIPG, +1 SIPG.
int symmetry_flag(Scheme s);
std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

enum class TauRule { Constant, InvHmin, Ipdg, KappaInvHmin, KappaIpdg };

/// tau = scale * rule(p, h_min, kappa).
struct Stabilization {
    TauRule rule = TauRule::InvHmin;
    double scale = 1.0;

    double value(int order, double hmin, double kappa) const;
};

std::string tau_rule_name(TauRule r);
TauRule parse_tau_rule(const std::string& name);

/// How h_min of an edge is measured from its adjacent elements.
enum class HminRule { Diameter, ShortestSide };

struct MethodConfig {
    Scheme scheme = Scheme::HDG;
    int order = 1;
    Stabilization tau;
    HminRule hmin = HminRule::Diameter;
    std::map<Scheme, Stabilization> tau_by_scheme; // overrides `tau` per scheme
    std::map<std::string, Scheme> tag_schemes;     // element tag -> scheme
    std::vector<Scheme> element_schemes;           // explicit per-element override

    const Stabilization& stabilization(Scheme s) const;
};

} // namespace hybridmg
