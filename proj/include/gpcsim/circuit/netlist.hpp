#pragma once

// Line-oriented netlist grammar.
//
//   * comment                     (also '; comment' at end of line)
//   .title <text>
//   .random <name> <dist>         declare a named random parameter
//   .temp <value>                 circuit temperature in Celsius (default 27)
//   .dc                           operating point
//   .dcsweep <src> <start> <stop> <step>
//   .tran <tstop> [hmax]
//   .ac <fstart> <fstop> <points-per-decade>
//   .probe v(<node>) i(<source-or-inductor>) ...
//   .end
//
//   R<name> n+ n- <value>         C, L likewise
//   V<name> n+ n- [dc <v>] [<v> | sin(vo va f [td]) | pulse(v1 v2 td tr tf pw [per]) | pwl(t v ...)] [ac <mag>]
//   I<name> ...                   same forms, current from n+ through the source to n-
//   D<name> a k [is= n= cj= xti= eg=]
//   M<name> d g s nmos|pmos [vt= kp= w= l= lambda= tcv= cgs= cgd=]
//   Q<name> c b e npn|pnp [is= bf= br= cje= cjc= xti= eg=]
//
// A <value> is a number with optional engineering suffix (t g meg k m u n p f),
// an inline distribution gauss(mu,sigma) | gamma(shape,shift,scale) |
// beta(alpha,beta,shift,scale) | uniform(lo,hi), or the name of a .random
// parameter. Two-terminal passives also accept dist=<dist-or-name>.

#include "gpcsim/errors.hpp"
#include "gpcsim/gpc_basis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gpcsim {

/// A device parameter: a constant, or the physical value of a random parameter.
struct ParamValue {
    double value = 0.0;
    int param = -1;  // index into Netlist::params when random

    bool is_random() const { return param >= 0; }
};

struct Sine {
    double offset = 0.0, amplitude = 0.0, freq = 0.0, delay = 0.0;
};
struct Pulse {
    double v1 = 0.0, v2 = 0.0, delay = 0.0, rise = 0.0, fall = 0.0, width = 0.0, period = 0.0;
};
struct Pwl {
    std::vector<double> t, v;
};
using Waveform = std::variant<std::monostate, Sine, Pulse, Pwl>;

struct SourceCard {
    std::string name;
    bool is_voltage = true;
    std::string pos, neg;
    std::optional<double> dc;
    Waveform wave;
    double ac_mag = 0.0;

    double value(double t) const {
        return std::visit(
            [&](const auto& w) -> double {
                using W = std::decay_t<decltype(w)>;
                if constexpr (std::is_same_v<W, std::monostate>) {
                    return dc.value_or(0.0);
                } else if constexpr (std::is_same_v<W, Sine>) {
                    if (t < w.delay) return w.offset;
                    return w.offset + w.amplitude * std::sin(2.0 * std::numbers::pi * w.freq * (t - w.delay));
                } else if constexpr (std::is_same_v<W, Pulse>) {
                    if (t < w.delay) return w.v1;
                    double tt = t - w.delay;
                    if (w.period > 0.0) tt = std::fmod(tt, w.period);
                    if (tt < w.rise) return w.v1 + (w.v2 - w.v1) * (w.rise > 0 ? tt / w.rise : 1.0);
                    tt -= w.rise;
                    if (tt < w.width) return w.v2;
                    tt -= w.width;
                    if (tt < w.fall) return w.v2 + (w.v1 - w.v2) * (w.fall > 0 ? tt / w.fall : 1.0);
                    return w.v1;
                } else {
                    if (w.t.empty()) return 0.0;
                    if (t <= w.t.front()) return w.v.front();
                    if (t >= w.t.back()) return w.v.back();
                    const auto it = std::upper_bound(w.t.begin(), w.t.end(), t);
                    const auto i = static_cast<std::size_t>(it - w.t.begin());
                    const double f = (t - w.t[i - 1]) / (w.t[i] - w.t[i - 1]);
                    return w.v[i - 1] + f * (w.v[i] - w.v[i - 1]);
                }
            },
            wave);
    }

    /// Value used by DC analyses: the explicit dc value, else the waveform at t = 0.
    double dc_value() const { return dc ? *dc : value(0.0); }

    /// Slope discontinuities of the waveform in (t0, t1].
    std::vector<double> breakpoints(double t0, double t1) const {
        std::vector<double> out;
        auto add = [&](double t) {
            if (t > t0 && t <= t1) out.push_back(t);
        };
        if (const auto* p = std::get_if<Pulse>(&wave)) {
            const double per = p->period > 0.0 ? p->period : std::numeric_limits<double>::infinity();
            for (double base = p->delay; base <= t1; base += per) {
                add(base);
                add(base + p->rise);
                add(base + p->rise + p->width);
                add(base + p->rise + p->width + p->fall);
                if (!std::isfinite(per)) break;
            }
        } else if (const auto* w = std::get_if<Pwl>(&wave)) {
            for (double t : w->t) add(t);
        } else if (const auto* s = std::get_if<Sine>(&wave)) {
            add(s->delay);
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

struct ResistorCard {
    std::string name, pos, neg;
    ParamValue r;
};
struct CapacitorCard {
    std::string name, pos, neg;
    ParamValue c;
};
struct InductorCard {
    std::string name, pos, neg;
    ParamValue l;
};
struct DiodeCard {
    std::string name, anode, cathode;
    ParamValue is{1e-14}, n{1.0}, cj{0.0}, xti{3.0}, eg{1.11};
};
struct MosfetCard {
    std::string name, drain, gate, source;
    bool pmos = false;
    ParamValue vt{0.5}, kp{2e-5}, w{1e-6}, l{1e-6}, lambda{0.0}, tcv{-2e-3}, cgs{0.0}, cgd{0.0};
};
struct BjtCard {
    std::string name, collector, base, emitter;
    bool pnp = false;
    ParamValue is{1e-16}, bf{100.0}, br{1.0}, cje{0.0}, cjc{0.0}, xti{3.0}, eg{1.11};
};
using DeviceCard = std::variant<ResistorCard, CapacitorCard, InductorCard, DiodeCard, MosfetCard, BjtCard>;

struct DcSweep {
    std::string source;
    double start = 0.0, stop = 0.0, step = 0.0;

    std::vector<double> values() const {
        std::vector<double> v;
        const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= n; ++i) v.push_back(start + static_cast<double>(i) * step);
        return v;
    }
};
struct TranSpec {
    double tstop = 0.0;
    double hmax = 0.0;  // 0: unset
};
struct AcSpec {
    double fstart = 0.0, fstop = 0.0;
    int points_per_decade = 10;

    std::vector<double> frequencies() const {
        std::vector<double> f;
        const double decades = std::log10(fstop / fstart);
        const auto n = static_cast<long>(std::floor(decades * points_per_decade + 1e-9));
        for (long i = 0; i <= n; ++i) f.push_back(fstart * std::pow(10.0, static_cast<double>(i) / points_per_decade));
        return f;
    }
};

struct Probe {
    bool voltage = true;
    std::string target;
};

struct Netlist {
    std::string title;
    std::vector<DeviceCard> devices;
    std::vector<SourceCard> sources;
    std::vector<RandomParameter> params;
    ParamValue temperature{27.0};
    std::vector<std::string> nodes;  // non-ground nodes, first-appearance order
    std::vector<Probe> probes;
    bool op = false;
    std::optional<DcSweep> dcsweep;
    std::optional<TranSpec> tran;
    std::optional<AcSpec> ac;
};

inline bool is_ground(std::string_view n) { return n == "0" || n == "gnd"; }

namespace detail {

inline std::string lower(std::string_view s) {
    std::string o(s);
    for (auto& c : o) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return o;
}

struct Token {
    std::string text;
    int column = 1;
};

/// Split a card on whitespace, keeping parenthesised groups intact and
/// gluing "key = value" into one token.
inline std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::string cur;
    int start = 0, depth = 0;
    auto flush = [&] {
        if (!cur.empty()) out.push_back({cur, start + 1});
        cur.clear();
    };
    for (int i = 0; i < static_cast<int>(line.size()); ++i) {
        const char c = line[static_cast<std::size_t>(i)];
        if (c == '(') ++depth;
        if (c == ')') depth = std::max(0, depth - 1);
        if (depth == 0 && std::isspace(static_cast<unsigned char>(c))) {
            flush();
            continue;
        }
        if (cur.empty()) start = i;
        cur += c;
    }
    flush();
    // Glue "a = b", "a= b", "a =b".
    std::vector<Token> glued;
    for (std::size_t i = 0; i < out.size(); ++i) {
        Token t = out[i];
        while (i + 1 < out.size() && (t.text.back() == '=' || out[i + 1].text.front() == '=')) {
            t.text += out[++i].text;
        }
        glued.push_back(t);
    }
    return glued;
}

/// Number with engineering suffix; trailing unit letters are ignored.
inline std::optional<double> parse_number(std::string_view s) {
    const std::string str(s);
    const char* begin = str.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) return std::nullopt;
    std::string rest = lower(std::string_view(end));
    double mult = 1.0;
    if (rest.rfind("meg", 0) == 0) {
        mult = 1e6;
    } else if (!rest.empty()) {
        switch (rest[0]) {
        case 't': mult = 1e12; break;
        case 'g': mult = 1e9; break;
        case 'k': mult = 1e3; break;
        case 'm': mult = 1e-3; break;
        case 'u': mult = 1e-6; break;
        case 'n': mult = 1e-9; break;
        case 'p': mult = 1e-12; break;
        case 'f': mult = 1e-15; break;
        default:
            if (!std::isalpha(static_cast<unsigned char>(rest[0]))) return std::nullopt;
        }
    }
    for (char c : rest)
        if (!std::isalpha(static_cast<unsigned char>(c))) return std::nullopt;
    return v * mult;
}

inline std::vector<std::string> split_args(std::string_view inside) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : inside) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

/// "name(args)" -> (name, args). Returns nullopt if the text has no parenthesis.
inline std::optional<std::pair<std::string, std::vector<std::string>>> call_form(std::string_view s) {
    const auto open = s.find('(');
    if (open == std::string_view::npos || s.back() != ')') return std::nullopt;
    return std::make_pair(lower(s.substr(0, open)), split_args(s.substr(open + 1, s.size() - open - 2)));
}

class Parser {
public:
    Netlist parse(std::string_view text) {
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            line_ = line_no;
            if (const auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
            while (!line.empty() && (line.back() == '\r' || std::isspace(static_cast<unsigned char>(line.back()))))
                line.remove_suffix(1);
            std::size_t lead = 0;
            while (lead < line.size() && std::isspace(static_cast<unsigned char>(line[lead]))) ++lead;
            if (lead == line.size() || line[lead] == '*') continue;
            auto toks = tokenize(line);
            if (toks.empty()) continue;
            if (toks[0].text[0] == '.')
                directive(toks, line);
            else
                card(toks);
        }
        finish();
        if (!diags_.empty()) throw ParseError(diags_);
        return std::move(net_);
    }

private:
    void error(int column, std::string msg) { diags_.push_back({line_, column, std::move(msg)}); }

    void note_node(const std::string& n) {
        if (is_ground(n)) {
            has_ground_ = true;
            return;
        }
        if (std::find(net_.nodes.begin(), net_.nodes.end(), n) == net_.nodes.end()) net_.nodes.push_back(n);
    }

    std::optional<Distribution> parse_distribution(const std::string& kind, const std::vector<double>& a,
                                                   double& shift, double& scale, int column) {
        auto need = [&](std::size_t n) {
            if (a.size() != n) {
                error(column, kind + " distribution expects " + std::to_string(n) + " arguments, got " +
                                  std::to_string(a.size()));
                return false;
            }
            return true;
        };
        try {
            if (kind == "gauss" || kind == "gaussian" || kind == "normal") {
                if (!need(2)) return std::nullopt;
                shift = a[0];
                scale = a[1];
                if (!(scale > 0.0)) throw DomainError("gauss sigma must be positive");
                return Distribution::gaussian();
            }
            if (kind == "uniform") {
                if (!need(2)) return std::nullopt;
                if (!(a[1] > a[0])) throw DomainError("uniform(lo,hi) requires hi > lo");
                shift = 0.5 * (a[0] + a[1]);
                scale = 0.5 * (a[1] - a[0]);
                return Distribution::uniform();
            }
            if (kind == "gamma") {
                if (!need(3)) return std::nullopt;
                shift = a[1];
                scale = a[2];
                return Distribution::gamma(a[0]);
            }
            if (kind == "beta") {
                if (!need(4)) return std::nullopt;
                shift = a[2];
                scale = a[3];
                return Distribution::beta(a[0], a[1]);
            }
        } catch (const DomainError& e) {
            error(column, std::string("malformed distribution: ") + e.what());
            return std::nullopt;
        }
        error(column, "unknown distribution '" + kind + "'");
        return std::nullopt;
    }

    /// Inline distribution -> new RandomParameter index.
    std::optional<int> inline_distribution(const std::string& text, const std::string& name, int column) {
        const auto call = call_form(text);
        if (!call) return std::nullopt;
        std::vector<double> args;
        for (const auto& s : call->second) {
            const auto v = parse_number(s);
            if (!v) {
                error(column, "malformed distribution argument '" + s + "'");
                return -2;
            }
            args.push_back(*v);
        }
        double shift = 0.0, scale = 1.0;
        const auto dist = parse_distribution(call->first, args, shift, scale, column);
        if (!dist) return -2;
        if (scale == 0.0) {
            error(column, "malformed distribution: zero scale");
            return -2;
        }
        net_.params.emplace_back(name, *dist, shift, scale);
        return static_cast<int>(net_.params.size()) - 1;
    }

    std::optional<ParamValue> value(const Token& tok, const std::string& name) {
        if (const auto v = parse_number(tok.text)) return ParamValue{*v, -1};
        if (tok.text.find('(') != std::string::npos) {
            const auto idx = inline_distribution(tok.text, name, tok.column);
            if (!idx) {
                error(tok.column, "cannot parse value '" + tok.text + "'");
                return std::nullopt;
            }
            if (*idx < 0) return std::nullopt;
            const auto& p = net_.params[static_cast<std::size_t>(*idx)];
            return ParamValue{p.physical_mean(), *idx};
        }
        const std::string key = lower(tok.text);
        for (std::size_t i = 0; i < net_.params.size(); ++i)
            if (lower(net_.params[i].name) == key)
                return ParamValue{net_.params[i].physical_mean(), static_cast<int>(i)};
        error(tok.column, "'" + tok.text + "' is neither a number, a distribution, nor a declared .random parameter");
        return std::nullopt;
    }

    std::optional<double> number(const Token& tok) {
        const auto v = parse_number(tok.text);
        if (!v) error(tok.column, "expected a number, got '" + tok.text + "'");
        return v;
    }

    void directive(const std::vector<Token>& toks, std::string_view line) {
        const std::string d = lower(toks[0].text);
        if (d == ".end") return;
        if (d == ".title") {
            const auto p = line.find_first_of(" \t");
            net_.title = p == std::string_view::npos ? "" : std::string(line.substr(p + 1));
            return;
        }
        if (d == ".random") {
            if (toks.size() != 3) {
                error(toks[0].column, ".random expects: .random <name> <distribution>");
                return;
            }
            for (const auto& p : net_.params)
                if (lower(p.name) == lower(toks[1].text)) {
                    error(toks[1].column, "random parameter '" + toks[1].text + "' declared twice");
                    return;
                }
            const auto idx = inline_distribution(toks[2].text, toks[1].text, toks[2].column);
            if (!idx) error(toks[2].column, "malformed distribution '" + toks[2].text + "'");
            return;
        }
        if (d == ".temp") {
            if (toks.size() != 2) {
                error(toks[0].column, ".temp expects one value");
                return;
            }
            if (auto v = value(toks[1], "temp")) net_.temperature = *v;
            return;
        }
        if (d == ".dc" || d == ".op") {
            net_.op = true;
            return;
        }
        if (d == ".dcsweep") {
            if (toks.size() != 5) {
                error(toks[0].column, ".dcsweep expects: .dcsweep <source> <start> <stop> <step>");
                return;
            }
            DcSweep s;
            s.source = toks[1].text;
            const auto a = number(toks[2]), b = number(toks[3]), c = number(toks[4]);
            if (!a || !b || !c) return;
            if (!(*c > 0.0) || *b < *a) {
                error(toks[4].column, ".dcsweep needs step > 0 and stop >= start");
                return;
            }
            s.start = *a;
            s.stop = *b;
            s.step = *c;
            sweep_column_ = toks[1].column;
            sweep_line_ = line_;
            net_.dcsweep = s;
            return;
        }
        if (d == ".tran") {
            if (toks.size() < 2 || toks.size() > 3) {
                error(toks[0].column, ".tran expects: .tran <tstop> [hmax]");
                return;
            }
            TranSpec t;
            const auto a = number(toks[1]);
            if (!a) return;
            if (!(*a > 0.0)) {
                error(toks[1].column, ".tran stop time must be positive");
                return;
            }
            t.tstop = *a;
            if (toks.size() == 3) {
                const auto h = number(toks[2]);
                if (!h) return;
                t.hmax = *h;
            }
            net_.tran = t;
            return;
        }
        if (d == ".ac") {
            if (toks.size() != 4) {
                error(toks[0].column, ".ac expects: .ac <fstart> <fstop> <points-per-decade>");
                return;
            }
            const auto a = number(toks[1]), b = number(toks[2]), c = number(toks[3]);
            if (!a || !b || !c) return;
            if (!(*a > 0.0) || *b < *a || *c < 1) {
                error(toks[0].column, ".ac needs 0 < fstart <= fstop and points >= 1");
                return;
            }
            net_.ac = AcSpec{*a, *b, static_cast<int>(*c)};
            return;
        }
        if (d == ".probe" || d == ".print") {
            for (std::size_t i = 1; i < toks.size(); ++i) {
                const auto call = call_form(toks[i].text);
                if (!call || call->second.size() != 1 || (call->first != "v" && call->first != "i")) {
                    error(toks[i].column, "probe must be v(<node>) or i(<element>)");
                    continue;
                }
                net_.probes.push_back({call->first == "v", call->second[0]});
                probe_pos_.push_back({line_, toks[i].column});
            }
            return;
        }
        error(toks[0].column, "unknown directive '" + toks[0].text + "'");
    }

    /// Trailing "key=value" tokens into (key, Token(value)).
    std::map<std::string, Token> keyvals(const std::vector<Token>& toks, std::size_t from) {
        std::map<std::string, Token> kv;
        for (std::size_t i = from; i < toks.size(); ++i) {
            const auto eq = toks[i].text.find('=');
            if (eq == std::string::npos) {
                error(toks[i].column, "expected key=value, got '" + toks[i].text + "'");
                continue;
            }
            kv[lower(toks[i].text.substr(0, eq))] =
                Token{toks[i].text.substr(eq + 1), toks[i].column + static_cast<int>(eq) + 1};
        }
        return kv;
    }

    void assign(std::map<std::string, Token>& kv, const std::string& device,
                std::initializer_list<std::pair<const char*, ParamValue*>> slots) {
        for (const auto& [key, slot] : slots) {
            const auto it = kv.find(key);
            if (it == kv.end()) continue;
            if (auto v = value(it->second, device + "." + key)) *slot = *v;
            kv.erase(it);
        }
        for (const auto& [key, tok] : kv) error(tok.column - static_cast<int>(key.size()) - 1,
                                                 "unknown parameter '" + key + "' for " + device);
    }

    bool need_tokens(const std::vector<Token>& toks, std::size_t n, const char* usage) {
        if (toks.size() < n) {
            error(toks[0].column, std::string("too few fields; usage: ") + usage);
            return false;
        }
        return true;
    }

    void passive(const std::vector<Token>& toks, char kind) {
        if (!need_tokens(toks, 4, "<name> <n+> <n-> <value> | dist=<distribution>")) return;
        const std::string& name = toks[0].text;
        std::optional<ParamValue> v;
        for (std::size_t i = 3; i < toks.size(); ++i) {
            const auto& t = toks[i].text;
            if (lower(t).rfind("dist=", 0) == 0) {
                v = value(Token{t.substr(5), toks[i].column + 5}, name);
            } else if (i == 3) {
                v = value(toks[i], name);
            } else {
                error(toks[i].column, "unexpected field '" + t + "'");
            }
        }
        if (!v) return;
        if (!v->is_random() && !(v->value > 0.0) && kind != 'c') {
            error(toks[3].column, name + " value must be positive");
            return;
        }
        note_node(toks[1].text);
        note_node(toks[2].text);
        if (kind == 'r') net_.devices.push_back(ResistorCard{name, toks[1].text, toks[2].text, *v});
        if (kind == 'c') net_.devices.push_back(CapacitorCard{name, toks[1].text, toks[2].text, *v});
        if (kind == 'l') {
            net_.devices.push_back(InductorCard{name, toks[1].text, toks[2].text, *v});
            element_names_.push_back(lower(name));
        }
    }

    void source(const std::vector<Token>& toks, bool voltage) {
        if (!need_tokens(toks, 4, "<name> <n+> <n-> [dc <v>] [<v> | sin(...) | pulse(...) | pwl(...)] [ac <mag>]"))
            return;
        SourceCard s;
        s.name = toks[0].text;
        s.is_voltage = voltage;
        s.pos = toks[1].text;
        s.neg = toks[2].text;
        for (std::size_t i = 3; i < toks.size(); ++i) {
            const std::string t = lower(toks[i].text);
            if (t.find('=') != std::string::npos && t.rfind("dist=", 0) == 0) {
                error(toks[i].column, "source values cannot be random (the input matrix is deterministic)");
                continue;
            }
            if ((t == "dc" || t == "ac") && i + 1 < toks.size()) {
                if (const auto v = number(toks[i + 1])) {
                    if (t == "dc")
                        s.dc = *v;
                    else
                        s.ac_mag = *v;
                }
                ++i;
                continue;
            }
            if (const auto call = call_form(toks[i].text)) {
                std::vector<double> a;
                bool ok = true;
                for (const auto& arg : call->second) {
                    const auto v = parse_number(arg);
                    if (!v) {
                        error(toks[i].column, "bad waveform argument '" + arg + "'");
                        ok = false;
                        break;
                    }
                    a.push_back(*v);
                }
                if (!ok) continue;
                if (call->first == "sin") {
                    if (a.size() < 3 || a.size() > 4) {
                        error(toks[i].column, "sin expects (vo va freq [td])");
                        continue;
                    }
                    s.wave = Sine{a[0], a[1], a[2], a.size() > 3 ? a[3] : 0.0};
                } else if (call->first == "pulse") {
                    if (a.size() < 6 || a.size() > 7) {
                        error(toks[i].column, "pulse expects (v1 v2 td tr tf pw [per])");
                        continue;
                    }
                    s.wave = Pulse{a[0], a[1], a[2], a[3], a[4], a[5], a.size() > 6 ? a[6] : 0.0};
                } else if (call->first == "pwl") {
                    if (a.size() < 2 || a.size() % 2) {
                        error(toks[i].column, "pwl expects time/value pairs");
                        continue;
                    }
                    Pwl p;
                    for (std::size_t k = 0; k < a.size(); k += 2) {
                        if (!p.t.empty() && !(a[k] > p.t.back())) {
                            error(toks[i].column, "pwl times must increase");
                            ok = false;
                            break;
                        }
                        p.t.push_back(a[k]);
                        p.v.push_back(a[k + 1]);
                    }
                    if (ok) s.wave = p;
                } else {
                    error(toks[i].column, "unknown waveform '" + call->first + "'");
                }
                continue;
            }
            if (const auto v = parse_number(toks[i].text)) {
                s.dc = *v;
                continue;
            }
            error(toks[i].column, "unexpected source field '" + toks[i].text + "'");
        }
        note_node(s.pos);
        note_node(s.neg);
        element_names_.push_back(lower(s.name));
        net_.sources.push_back(std::move(s));
    }

    void card(const std::vector<Token>& toks) {
        const char kind = static_cast<char>(std::tolower(static_cast<unsigned char>(toks[0].text[0])));
        const std::string& name = toks[0].text;
        for (const auto& n : seen_names_)
            if (n == lower(name)) {
                error(toks[0].column, "duplicate element name '" + name + "'");
                return;
            }
        seen_names_.push_back(lower(name));
        switch (kind) {
        case 'r':
        case 'c':
        case 'l': passive(toks, kind); return;
        case 'v': source(toks, true); return;
        case 'i': source(toks, false); return;
        case 'd': {
            if (!need_tokens(toks, 3, "D<name> <anode> <cathode> [is= n= cj=]")) return;
            DiodeCard d;
            d.name = name;
            d.anode = toks[1].text;
            d.cathode = toks[2].text;
            auto kv = keyvals(toks, 3);
            assign(kv, name, {{"is", &d.is}, {"n", &d.n}, {"cj", &d.cj}, {"xti", &d.xti}, {"eg", &d.eg}});
            note_node(d.anode);
            note_node(d.cathode);
            net_.devices.push_back(d);
            return;
        }
        case 'm': {
            if (!need_tokens(toks, 5, "M<name> <d> <g> <s> nmos|pmos [vt= kp= w= l= lambda= tcv= cgs= cgd=]")) return;
            MosfetCard m;
            m.name = name;
            m.drain = toks[1].text;
            m.gate = toks[2].text;
            m.source = toks[3].text;
            const std::string type = lower(toks[4].text);
            if (type != "nmos" && type != "pmos") {
                error(toks[4].column, "MOSFET type must be nmos or pmos");
                return;
            }
            m.pmos = type == "pmos";
            auto kv = keyvals(toks, 5);
            assign(kv, name,
                   {{"vt", &m.vt}, {"kp", &m.kp}, {"w", &m.w}, {"l", &m.l}, {"lambda", &m.lambda}, {"tcv", &m.tcv},
                    {"cgs", &m.cgs}, {"cgd", &m.cgd}});
            note_node(m.drain);
            note_node(m.gate);
            note_node(m.source);
            net_.devices.push_back(m);
            return;
        }
        case 'q': {
            if (!need_tokens(toks, 5, "Q<name> <c> <b> <e> npn|pnp [is= bf= br= cje= cjc=]")) return;
            BjtCard q;
            q.name = name;
            q.collector = toks[1].text;
            q.base = toks[2].text;
            q.emitter = toks[3].text;
            const std::string type = lower(toks[4].text);
            if (type != "npn" && type != "pnp") {
                error(toks[4].column, "BJT type must be npn or pnp");
                return;
            }
            q.pnp = type == "pnp";
            auto kv = keyvals(toks, 5);
            assign(kv, name,
                   {{"is", &q.is}, {"bf", &q.bf}, {"br", &q.br}, {"cje", &q.cje}, {"cjc", &q.cjc}, {"xti", &q.xti},
                    {"eg", &q.eg}});
            note_node(q.collector);
            note_node(q.base);
            note_node(q.emitter);
            net_.devices.push_back(q);
            return;
        }
        default: error(toks[0].column, "unknown device kind '" + std::string(1, toks[0].text[0]) + "' in '" + name + "'");
        }
    }

    void finish() {
        line_ = 0;
        if (net_.devices.empty() && net_.sources.empty()) {
            error(1, "netlist contains no devices");
            return;
        }
        if (!has_ground_) error(1, "no ground node ('0' or 'gnd') in the netlist");
        if (net_.dcsweep) {
            const std::string want = lower(net_.dcsweep->source);
            const bool found = std::any_of(net_.sources.begin(), net_.sources.end(),
                                           [&](const SourceCard& s) { return lower(s.name) == want; });
            if (!found)
                diags_.push_back({sweep_line_, sweep_column_, "sweep source '" + net_.dcsweep->source + "' is not declared"});
        }
        for (std::size_t i = 0; i < net_.probes.size(); ++i) {
            const auto& p = net_.probes[i];
            if (p.voltage) {
                if (!is_ground(p.target) && std::find(net_.nodes.begin(), net_.nodes.end(), p.target) == net_.nodes.end())
                    diags_.push_back({probe_pos_[i].first, probe_pos_[i].second, "undeclared node '" + p.target + "'"});
            } else if (std::find(element_names_.begin(), element_names_.end(), lower(p.target)) == element_names_.end()) {
                diags_.push_back({probe_pos_[i].first, probe_pos_[i].second,
                                  "'" + p.target + "' is not a voltage source, current source or inductor"});
            }
        }
    }

    Netlist net_;
    std::vector<Diagnostic> diags_;
    std::vector<std::string> seen_names_;
    std::vector<std::string> element_names_;
    std::vector<std::pair<int, int>> probe_pos_;
    bool has_ground_ = false;
    int line_ = 0;
    int sweep_line_ = 0, sweep_column_ = 0;
};

} // namespace detail

inline Netlist parse_netlist(std::string_view text) { return detail::Parser{}.parse(text); }

} // namespace gpcsim
