#pragma once

// Compact device models with analytic derivatives. All functions are pure:
// terminal voltages in, terminal currents and partial derivatives out.

#include <algorithm>
#include <cmath>

namespace gpcsim::device {

inline constexpr double boltzmann = 1.380649e-23;
inline constexpr double charge = 1.602176634e-19;
inline constexpr double tnom_celsius = 27.0;
inline constexpr double kelvin_offset = 273.15;
inline constexpr double gmin = 1e-12;
/// Exponent argument beyond which junction exponentials continue linearly.
inline constexpr double exp_limit = 40.0;

inline double thermal_voltage(double celsius) { return boltzmann * (celsius + kelvin_offset) / charge; }

/// exp(x) for x <= exp_limit, first-order continuation above. Sets d = d/dx.
inline double limexp(double x, double& d) {
    if (x <= exp_limit) {
        d = std::exp(x);
        return d;
    }
    d = std::exp(exp_limit);
    return d * (1.0 + x - exp_limit);
}

/// Saturation current at temperature T (Celsius).
inline double saturation_current(double is_nom, double n, double xti, double eg, double celsius) {
    const double ratio = (celsius + kelvin_offset) / (tnom_celsius + kelvin_offset);
    const double vt = thermal_voltage(celsius);
    return is_nom * std::pow(ratio, xti / n) * std::exp((ratio - 1.0) * eg / (n * vt));
}

struct JunctionResult {
    double i = 0.0;  // anode -> cathode
    double g = 0.0;  // di/dv
};

/// Shockley junction i = Is (exp(v / (n Vt)) - 1).
inline JunctionResult junction(double v, double is, double n, double vt) {
    double d = 0.0;
    const double nvt = n * vt;
    const double e = limexp(v / nvt, d);
    return {is * (e - 1.0), is * d / nvt};
}

struct MosResult {
    double id = 0.0;  // into drain, out of source
    double d_vd = 0.0, d_vg = 0.0, d_vs = 0.0;
};

/// Level-1 square-law drain current for vds >= 0 as a function of (vgs, vds).
/// Returns id and partials (gm, gds).
inline void mos_forward(double vgs, double vds, double vth, double beta, double lambda, double& id, double& gm,
                        double& gds) {
    const double vov = vgs - vth;
    if (vov <= 0.0) {
        id = gm = gds = 0.0;
        return;
    }
    const double clm = 1.0 + lambda * vds;
    if (vds >= vov) {
        id = 0.5 * beta * vov * vov * clm;
        gm = beta * vov * clm;
        gds = 0.5 * beta * vov * vov * lambda;
    } else {
        const double core = vov * vds - 0.5 * vds * vds;
        id = beta * core * clm;
        gm = beta * vds * clm;
        gds = beta * (vov - vds) * clm + beta * core * lambda;
    }
}

/// NMOS drain current with source/drain interchange for vds < 0.
inline MosResult nmos(double vd, double vg, double vs, double vth, double beta, double lambda) {
    MosResult r;
    double id = 0.0, gm = 0.0, gds = 0.0;
    if (vd >= vs) {
        mos_forward(vg - vs, vd - vs, vth, beta, lambda, id, gm, gds);
        r.id = id;
        r.d_vg = gm;
        r.d_vd = gds;
        r.d_vs = -gm - gds;
    } else {
        mos_forward(vg - vd, vs - vd, vth, beta, lambda, id, gm, gds);
        r.id = -id;
        r.d_vg = -gm;
        r.d_vs = -gds;
        r.d_vd = gm + gds;
    }
    return r;
}

/// PMOS as the mirror image of NMOS; vth is the threshold magnitude.
inline MosResult pmos(double vd, double vg, double vs, double vth, double beta, double lambda) {
    const MosResult n = nmos(-vd, -vg, -vs, vth, beta, lambda);
    return {-n.id, n.d_vd, n.d_vg, n.d_vs};
}

struct BjtResult {
    double ic = 0.0, ib = 0.0, ie = 0.0;  // currents into the terminals
    // Partials with respect to vbe and vbc.
    double dic_dvbe = 0.0, dic_dvbc = 0.0, dib_dvbe = 0.0, dib_dvbc = 0.0;
};

/// Ebers-Moll transport model, NPN polarity.
inline BjtResult ebers_moll(double vbe, double vbc, double is, double bf, double br, double vt) {
    double dbe = 0.0, dbc = 0.0;
    const double ebe = limexp(vbe / vt, dbe);
    const double ebc = limexp(vbc / vt, dbc);
    BjtResult r;
    const double icc = is * (ebe - ebc);
    r.ic = icc - is / br * (ebc - 1.0);
    r.ib = is / bf * (ebe - 1.0) + is / br * (ebc - 1.0);
    r.ie = -(r.ic + r.ib);
    r.dic_dvbe = is * dbe / vt;
    r.dic_dvbc = -is * dbc / vt - is / br * dbc / vt;
    r.dib_dvbe = is / bf * dbe / vt;
    r.dib_dvbc = is / br * dbc / vt;
    return r;
}

} // namespace gpcsim::device
