#include "hybridmg/problem.hpp"

#include "hybridmg/error.hpp"

#include <algorithm>
#include <cctype>

namespace hybridmg {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace

ProblemSpec scalar_problem(ScalarField kappa, ScalarField f, ScalarField dirichlet, ScalarField exact) {
    ProblemSpec p;
    p.K = [kappa](const Eigen::Vector2d& x) -> Eigen::Matrix2d { return kappa(x) * Eigen::Matrix2d::Identity(); };
    p.kappa = std::move(kappa);
    p.f = std::move(f);
    p.dirichlet = std::move(dirichlet);
    p.exact = std::move(exact);
    return p;
}

int symmetry_flag(Scheme s) {
    switch (s) {
    case Scheme::NIPG: return -1;
    case Scheme::IIPG: return 0;
    case Scheme::SIPG: return 1;
    default: throw ConfigError("symmetry flag is only defined for interior-penalty schemes");
    }
}

std::string scheme_name(Scheme s) {
    switch (s) {
    case Scheme::HDG: return "hdg";
    case Scheme::NIPG: return "nipg";
    case Scheme::IIPG: return "iipg";
    case Scheme::SIPG: return "sipg";
    case Scheme::RT: return "rt";
    }
    return "?";
}

Scheme parse_scheme(const std::string& name) {
    const std::string n = lower(name);
    if (n == "hdg") return Scheme::HDG;
    if (n == "nipg" || n == "nipg-h") return Scheme::NIPG;
    if (n == "iipg" || n == "iipg-h") return Scheme::IIPG;
    if (n == "sipg" || n == "sipg-h") return Scheme::SIPG;
    if (n == "rt" || n == "rt-h" || n == "rth") return Scheme::RT;
    throw ConfigError("unknown scheme '" + name + "'");
}

double Stabilization::value(int order, double hmin, double kappa) const {
    const double ipdg = (order + 1.0) * (order + 2.0);
    switch (rule) {
    case TauRule::Constant: return scale;
    case TauRule::InvHmin: return scale / hmin;
    case TauRule::Ipdg: return scale * ipdg / hmin;
    case TauRule::KappaInvHmin: return scale * kappa / hmin;
    case TauRule::KappaIpdg: return scale * kappa * ipdg / hmin;
    }
    return scale;
}

std::string tau_rule_name(TauRule r) {
    switch (r) {
    case TauRule::Constant: return "constant";
    case TauRule::InvHmin: return "inv_hmin";
    case TauRule::Ipdg: return "ipdg";
    case TauRule::KappaInvHmin: return "kappa_inv_hmin";
    case TauRule::KappaIpdg: return "kappa_ipdg";
    }
    return "?";
}

TauRule parse_tau_rule(const std::string& name) {
    const std::string n = lower(name);
    if (n == "constant") return TauRule::Constant;
    if (n == "inv_hmin") return TauRule::InvHmin;
    if (n == "ipdg") return TauRule::Ipdg;
    if (n == "kappa_inv_hmin") return TauRule::KappaInvHmin;
    if (n == "kappa_ipdg") return TauRule::KappaIpdg;
    throw ConfigError("unknown stabilization rule '" + name + "'");
}

const Stabilization& MethodConfig::stabilization(Scheme s) const {
    auto it = tau_by_scheme.find(s);
    return it == tau_by_scheme.end() ? tau : it->second;
}

} // namespace hybridmg
