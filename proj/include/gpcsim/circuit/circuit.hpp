#pragma once

// Modified nodal analysis of a netlist whose device parameters may depend on
// the random germ xi:
//
//   d/dt q(x, xi) + f(x, xi) = B u(t)
//
// State layout: node voltages in first-appearance order, then inductor
// currents, then voltage-source currents.

#include "gpcsim/circuit/devices.hpp"
#include "gpcsim/circuit/netlist.hpp"
#include "gpcsim/errors.hpp"
#include "gpcsim/gpc_basis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace gpcsim {

/// q, f and their Jacobians at one (x, xi).
struct CircuitEval {
    Eigen::VectorXd q, f;
    Eigen::MatrixXd dq, df;

    void resize(Eigen::Index n) {
        q.setZero(n);
        f.setZero(n);
        dq.setZero(n, n);
        df.setZero(n, n);
    }
};

class StochasticCircuit {
public:
    explicit StochasticCircuit(Netlist net) : net_(std::move(net)) { assemble(); }

    static StochasticCircuit from_text(std::string_view text) { return StochasticCircuit(parse_netlist(text)); }

    static StochasticCircuit from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open netlist '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return from_text(ss.str());
    }

    const Netlist& netlist() const { return net_; }
    Eigen::Index size() const { return n_; }
    int num_nodes() const { return static_cast<int>(net_.nodes.size()); }
    int num_params() const { return static_cast<int>(net_.params.size()); }
    const std::vector<RandomParameter>& params() const { return net_.params; }
    const std::vector<std::string>& state_names() const { return names_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    std::vector<Distribution> germs() const {
        std::vector<Distribution> d;
        for (const auto& p : net_.params) d.push_back(p.dist);
        return d;
    }

    Eigen::VectorXd germ_mean() const {
        Eigen::VectorXd m(num_params());
        for (int k = 0; k < num_params(); ++k) m(k) = net_.params[static_cast<std::size_t>(k)].dist.mean();
        return m;
    }

    /// Index of "v(node)" or "i(element)", or of a bare node name.
    Eigen::Index state_index(const std::string& name) const {
        const std::string key = detail::lower(name);
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (detail::lower(names_[i]) == key || detail::lower(names_[i]) == "v(" + key + ")")
                return static_cast<Eigen::Index>(i);
        throw DomainError("no state named '" + name + "'");
    }

    /// States selected by .probe cards, or every state when there are none.
    std::vector<Eigen::Index> output_states() const {
        std::vector<Eigen::Index> out;
        for (const auto& p : net_.probes) {
            if (p.voltage && is_ground(p.target)) continue;
            out.push_back(state_index((p.voltage ? "v(" : "i(") + p.target + ")"));
        }
        if (out.empty()) {
            out.resize(static_cast<std::size_t>(n_));
            std::iota(out.begin(), out.end(), Eigen::Index{0});
        }
        return out;
    }

    // ---- inputs -----------------------------------------------------------

    int num_inputs() const { return static_cast<int>(net_.sources.size()); }
    const Eigen::MatrixXd& input_matrix() const { return B_; }

    int source_index(const std::string& name) const {
        for (std::size_t i = 0; i < net_.sources.size(); ++i)
            if (detail::lower(net_.sources[i].name) == detail::lower(name)) return static_cast<int>(i);
        throw DomainError("no source named '" + name + "'");
    }

    /// Override the DC value of a source (used by DC sweeps).
    void set_source_dc(int index, double value) { net_.sources.at(static_cast<std::size_t>(index)).dc = value; }

    Eigen::VectorXd inputs(double t) const {
        Eigen::VectorXd u(num_inputs());
        for (int k = 0; k < num_inputs(); ++k) u(k) = net_.sources[static_cast<std::size_t>(k)].value(t);
        return u;
    }

    Eigen::VectorXd dc_inputs() const {
        Eigen::VectorXd u(num_inputs());
        for (int k = 0; k < num_inputs(); ++k) u(k) = net_.sources[static_cast<std::size_t>(k)].dc_value();
        return u;
    }

    Eigen::VectorXd excitation(double t) const { return B_ * inputs(t); }
    Eigen::VectorXd dc_excitation() const { return B_ * dc_inputs(); }

    Eigen::VectorXd ac_excitation() const {
        Eigen::VectorXd u(num_inputs());
        for (int k = 0; k < num_inputs(); ++k) u(k) = net_.sources[static_cast<std::size_t>(k)].ac_mag;
        return B_ * u;
    }

    /// Sorted, de-duplicated source breakpoints in (t0, t1].
    std::vector<double> breakpoints(double t0, double t1) const {
        std::vector<double> all;
        for (const auto& s : net_.sources) {
            const auto b = s.breakpoints(t0, t1);
            all.insert(all.end(), b.begin(), b.end());
        }
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end(),
                              [&](double a, double b) { return std::abs(a - b) <= 1e-15 * std::max(1.0, std::abs(b)); }),
                  all.end());
        return all;
    }

    // ---- evaluation -------------------------------------------------------

    double temperature(const Eigen::VectorXd& xi) const { return value(net_.temperature, xi); }

    /// Physical value of a device parameter at germ xi.
    double value(const ParamValue& p, const Eigen::VectorXd& xi) const {
        return p.is_random() ? net_.params[static_cast<std::size_t>(p.param)].physical(xi(p.param)) : p.value;
    }

    void check_germ(const Eigen::VectorXd& xi) const {
        if (xi.size() != num_params())
            throw DomainError("germ has dimension " + std::to_string(xi.size()) + ", circuit expects " +
                              std::to_string(num_params()));
        for (int k = 0; k < num_params(); ++k)
            if (!net_.params[static_cast<std::size_t>(k)].dist.contains(xi(k)))
                throw DomainError("germ component " + std::to_string(k) + " = " + std::to_string(xi(k)) +
                                  " is outside the support of " + net_.params[static_cast<std::size_t>(k)].name);
    }

    /// Stamp every device at (x, xi) into out. Jacobians are filled when requested.
    void evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, CircuitEval& out, bool jacobian = true) const {
        if (x.size() != n_) throw DomainError("state vector has wrong length");
        check_germ(xi);
        out.resize(n_);
        Stamper s{x, out, jacobian};
        const double temp = temperature(xi);
        const double vt = device::thermal_voltage(temp);
        for (std::size_t d = 0; d < net_.devices.size(); ++d) {
            const auto& nd = dev_nodes_[d];
            std::visit([&](const auto& card) { stamp(card, nd, xi, temp, vt, s); }, net_.devices[d]);
        }
        for (std::size_t k = 0; k < net_.sources.size(); ++k) {
            const auto& src = net_.sources[k];
            if (!src.is_voltage) continue;
            const int a = node_of(src.pos), b = node_of(src.neg);
            const Eigen::Index br = vsrc_branch_[k];
            s.f(a, x(br));
            s.f(b, -x(br));
            s.df(a, br, 1.0);
            s.df(b, br, -1.0);
            s.f(br, s.v(a) - s.v(b));
            s.df(br, a, 1.0);
            s.df(br, b, -1.0);
        }
        if (!out.q.allFinite() || !out.f.allFinite() || (jacobian && (!out.dq.allFinite() || !out.df.allFinite())))
            throw EvaluationError("device evaluation produced a non-finite value");
    }

private:
    struct Stamper {
        const Eigen::VectorXd& x;
        CircuitEval& e;
        bool jac;

        double v(int i) const { return i < 0 ? 0.0 : x(i); }
        void f(Eigen::Index i, double val) {
            if (i >= 0) e.f(i) += val;
        }
        void q(Eigen::Index i, double val) {
            if (i >= 0) e.q(i) += val;
        }
        void df(Eigen::Index i, Eigen::Index j, double val) {
            if (jac && i >= 0 && j >= 0) e.df(i, j) += val;
        }
        void dq(Eigen::Index i, Eigen::Index j, double val) {
            if (jac && i >= 0 && j >= 0) e.dq(i, j) += val;
        }
        /// Linear conductance g between a and b.
        void conductance(int a, int b, double g) {
            const double i = g * (v(a) - v(b));
            f(a, i);
            f(b, -i);
            df(a, a, g);
            df(a, b, -g);
            df(b, a, -g);
            df(b, b, g);
        }
        void capacitance(int a, int b, double c) {
            if (c == 0.0) return;
            const double qq = c * (v(a) - v(b));
            q(a, qq);
            q(b, -qq);
            dq(a, a, c);
            dq(a, b, -c);
            dq(b, a, -c);
            dq(b, b, c);
        }
    };

    using Nodes = std::array<int, 4>;  // terminals, then branch index where relevant

    void stamp(const ResistorCard& r, const Nodes& nd, const Eigen::VectorXd& xi, double, double, Stamper& s) const {
        const double R = value(r.r, xi);
        if (!(R > 0.0)) throw DomainError(r.name + ": non-positive resistance " + std::to_string(R));
        s.conductance(nd[0], nd[1], 1.0 / R);
    }

    void stamp(const CapacitorCard& c, const Nodes& nd, const Eigen::VectorXd& xi, double, double, Stamper& s) const {
        s.capacitance(nd[0], nd[1], value(c.c, xi));
    }

    void stamp(const InductorCard& l, const Nodes& nd, const Eigen::VectorXd& xi, double, double, Stamper& s) const {
        const double L = value(l.l, xi);
        const int a = nd[0], b = nd[1], br = nd[2];
        const double i = s.x(br);
        s.f(a, i);
        s.f(b, -i);
        s.df(a, br, 1.0);
        s.df(b, br, -1.0);
        s.q(br, L * i);
        s.dq(br, br, L);
        s.f(br, -(s.v(a) - s.v(b)));
        s.df(br, a, -1.0);
        s.df(br, b, 1.0);
    }

    void stamp(const DiodeCard& d, const Nodes& nd, const Eigen::VectorXd& xi, double temp, double vt,
               Stamper& s) const {
        const double n = value(d.n, xi);
        const double is = device::saturation_current(value(d.is, xi), n, value(d.xti, xi), value(d.eg, xi), temp);
        const int a = nd[0], k = nd[1];
        const auto j = device::junction(s.v(a) - s.v(k), is, n, vt);
        s.f(a, j.i);
        s.f(k, -j.i);
        s.df(a, a, j.g);
        s.df(a, k, -j.g);
        s.df(k, a, -j.g);
        s.df(k, k, j.g);
        s.conductance(a, k, device::gmin);
        s.capacitance(a, k, value(d.cj, xi));
    }

    void stamp(const MosfetCard& m, const Nodes& nd, const Eigen::VectorXd& xi, double temp, double,
               Stamper& s) const {
        const double w = value(m.w, xi), l = value(m.l, xi), kp = value(m.kp, xi);
        if (!(w > 0.0 && l > 0.0 && kp > 0.0)) throw DomainError(m.name + ": W, L and kp must be positive");
        const double beta = kp * w / l;
        const double vth = value(m.vt, xi) + value(m.tcv, xi) * (temp - device::tnom_celsius);
        const double lambda = value(m.lambda, xi);
        const int d = nd[0], g = nd[1], src = nd[2];
        const auto r = m.pmos ? device::pmos(s.v(d), s.v(g), s.v(src), vth, beta, lambda)
                              : device::nmos(s.v(d), s.v(g), s.v(src), vth, beta, lambda);
        s.f(d, r.id);
        s.f(src, -r.id);
        s.df(d, d, r.d_vd);
        s.df(d, g, r.d_vg);
        s.df(d, src, r.d_vs);
        s.df(src, d, -r.d_vd);
        s.df(src, g, -r.d_vg);
        s.df(src, src, -r.d_vs);
        s.conductance(d, src, device::gmin);
        s.capacitance(g, src, value(m.cgs, xi));
        s.capacitance(g, d, value(m.cgd, xi));
    }

    void stamp(const BjtCard& q, const Nodes& nd, const Eigen::VectorXd& xi, double temp, double vt,
               Stamper& s) const {
        const double is = device::saturation_current(value(q.is, xi), 1.0, value(q.xti, xi), value(q.eg, xi), temp);
        const double bf = value(q.bf, xi), br = value(q.br, xi);
        if (!(bf > 0.0 && br > 0.0)) throw DomainError(q.name + ": bf and br must be positive");
        const int c = nd[0], b = nd[1], e = nd[2];
        const double sg = q.pnp ? -1.0 : 1.0;
        const auto r = device::ebers_moll(sg * (s.v(b) - s.v(e)), sg * (s.v(b) - s.v(c)), is, bf, br, vt);
        const double ic = sg * r.ic, ib = sg * r.ib, ie = sg * r.ie;
        s.f(c, ic);
        s.f(b, ib);
        s.f(e, ie);
        // d/dvb = d/dvbe + d/dvbc, d/dve = -d/dvbe, d/dvc = -d/dvbc (sign factors cancel).
        const double ic_b = r.dic_dvbe + r.dic_dvbc, ic_e = -r.dic_dvbe, ic_c = -r.dic_dvbc;
        const double ib_b = r.dib_dvbe + r.dib_dvbc, ib_e = -r.dib_dvbe, ib_c = -r.dib_dvbc;
        s.df(c, b, ic_b);
        s.df(c, e, ic_e);
        s.df(c, c, ic_c);
        s.df(b, b, ib_b);
        s.df(b, e, ib_e);
        s.df(b, c, ib_c);
        s.df(e, b, -(ic_b + ib_b));
        s.df(e, e, -(ic_e + ib_e));
        s.df(e, c, -(ic_c + ib_c));
        s.conductance(b, e, device::gmin);
        s.conductance(b, c, device::gmin);
        s.capacitance(b, e, value(q.cje, xi));
        s.capacitance(b, c, value(q.cjc, xi));
    }

    int node_of(const std::string& name) const {
        if (is_ground(name)) return -1;
        const auto it = std::find(net_.nodes.begin(), net_.nodes.end(), name);
        return static_cast<int>(it - net_.nodes.begin());
    }

    static std::vector<ParamValue*> slots(DeviceCard& card) {
        return std::visit(
            [](auto& c) -> std::vector<ParamValue*> {
                using C = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<C, ResistorCard>) return {&c.r};
                else if constexpr (std::is_same_v<C, CapacitorCard>) return {&c.c};
                else if constexpr (std::is_same_v<C, InductorCard>) return {&c.l};
                else if constexpr (std::is_same_v<C, DiodeCard>) return {&c.is, &c.n, &c.cj, &c.xti, &c.eg};
                else if constexpr (std::is_same_v<C, MosfetCard>)
                    return {&c.vt, &c.kp, &c.w, &c.l, &c.lambda, &c.tcv, &c.cgs, &c.cgd};
                else return {&c.is, &c.bf, &c.br, &c.cje, &c.cjc, &c.xti, &c.eg};
            },
            card);
    }

    /// Drop declared parameters nothing refers to, so the germ dimension
    /// counts only parameters that influence the circuit.
    void prune_params() {
        std::vector<ParamValue*> all{&net_.temperature};
        for (auto& d : net_.devices)
            for (auto* p : slots(d)) all.push_back(p);
        std::vector<int> used(net_.params.size(), 0);
        for (auto* p : all)
            if (p->is_random()) used[static_cast<std::size_t>(p->param)] = 1;
        std::vector<int> remap(net_.params.size(), -1);
        std::vector<RandomParameter> kept;
        for (std::size_t k = 0; k < net_.params.size(); ++k) {
            if (used[k]) {
                remap[k] = static_cast<int>(kept.size());
                kept.push_back(net_.params[k]);
            } else {
                warnings_.push_back("random parameter '" + net_.params[k].name + "' is not used by any device");
            }
        }
        for (auto* p : all)
            if (p->is_random()) p->param = remap[static_cast<std::size_t>(p->param)];
        net_.params = std::move(kept);
    }

    void assemble() {
        prune_params();
        const int nn = num_nodes();
        for (const auto& name : net_.nodes) names_.push_back("v(" + name + ")");
        Eigen::Index next = nn;
        // Union-find over nodes plus ground (index nn) for DC connectivity.
        std::vector<int> parent(static_cast<std::size_t>(nn + 1));
        std::iota(parent.begin(), parent.end(), 0);
        auto at = [&](int i) -> int& { return parent[static_cast<std::size_t>(i)]; };
        auto find = [&](int i) {
            while (at(i) != i) {
                at(i) = at(at(i));
                i = at(i);
            }
            return i;
        };
        auto join = [&](int a, int b) {
            a = a < 0 ? nn : a;
            b = b < 0 ? nn : b;
            parent[static_cast<std::size_t>(find(a))] = find(b);
        };
        for (const auto& dev : net_.devices) {
            Nodes nd{-1, -1, -1, -1};
            std::visit(
                [&](const auto& c) {
                    using C = std::decay_t<decltype(c)>;
                    if constexpr (std::is_same_v<C, ResistorCard> || std::is_same_v<C, CapacitorCard>) {
                        nd = {node_of(c.pos), node_of(c.neg), -1, -1};
                        if constexpr (std::is_same_v<C, ResistorCard>) join(nd[0], nd[1]);
                    } else if constexpr (std::is_same_v<C, InductorCard>) {
                        nd = {node_of(c.pos), node_of(c.neg), static_cast<int>(next++), -1};
                        names_.push_back("i(" + c.name + ")");
                        join(nd[0], nd[1]);
                    } else if constexpr (std::is_same_v<C, DiodeCard>) {
                        nd = {node_of(c.anode), node_of(c.cathode), -1, -1};
                        join(nd[0], nd[1]);
                    } else if constexpr (std::is_same_v<C, MosfetCard>) {
                        nd = {node_of(c.drain), node_of(c.gate), node_of(c.source), -1};
                        join(nd[0], nd[2]);
                    } else {
                        nd = {node_of(c.collector), node_of(c.base), node_of(c.emitter), -1};
                        join(nd[0], nd[1]);
                        join(nd[1], nd[2]);
                    }
                },
                dev);
            dev_nodes_.push_back(nd);
        }
        vsrc_branch_.assign(net_.sources.size(), -1);
        for (std::size_t k = 0; k < net_.sources.size(); ++k) {
            const auto& s = net_.sources[k];
            if (!s.is_voltage) continue;
            vsrc_branch_[k] = next++;
            names_.push_back("i(" + s.name + ")");
            join(node_of(s.pos), node_of(s.neg));
        }
        n_ = next;
        B_ = Eigen::MatrixXd::Zero(n_, num_inputs());
        for (std::size_t k = 0; k < net_.sources.size(); ++k) {
            const auto& s = net_.sources[k];
            const auto col = static_cast<Eigen::Index>(k);
            if (s.is_voltage) {
                B_(vsrc_branch_[k], col) = 1.0;
            } else {
                if (const int a = node_of(s.pos); a >= 0) B_(a, col) = -1.0;
                if (const int b = node_of(s.neg); b >= 0) B_(b, col) = 1.0;
            }
        }
        for (int i = 0; i < nn; ++i)
            if (find(i) != find(nn))
                warnings_.push_back("node '" + net_.nodes[static_cast<std::size_t>(i)] +
                                    "' has no DC path to ground");
    }

    Netlist net_;
    Eigen::Index n_ = 0;
    std::vector<std::string> names_;
    std::vector<std::string> warnings_;
    std::vector<Nodes> dev_nodes_;
    std::vector<Eigen::Index> vsrc_branch_;
    Eigen::MatrixXd B_;
};

} // namespace gpcsim
