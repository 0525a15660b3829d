#include "annihilator/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "annihilator/jet.hpp"

#include <nlohmann/json.hpp>

namespace annihilator {

namespace {

constexpr double kPi = std::numbers::pi;

// Below this distance from the support edge exp(-1/t) underflows to exactly
// zero in double precision, as do all its derivative terms.
constexpr double kFlatCut = 1e-6;

Jet4 smooth_step_jet(double t) {
    if (t <= kFlatCut) return Jet4::constant(0.0);
    if (t >= 1.0 - kFlatCut) return Jet4::constant(1.0);
    const Jet4 tv = Jet4::variable(t);
    const Jet4 b0 = exp(-(Jet4::constant(1.0) / tv));
    const Jet4 b1 = exp(-(Jet4::constant(1.0) / (1.0 - tv)));
    return b0 / (b0 + b1);
}

} // namespace

double smooth_step(double t) {
    if (t <= kFlatCut) return 0.0;
    if (t >= 1.0 - kFlatCut) return 1.0;
    const double b0 = std::exp(-1.0 / t);
    const double b1 = std::exp(-1.0 / (1.0 - t));
    return b0 / (b0 + b1);
}

double smooth_step_deriv(double t, int order) {
    if (order < 0 || order > 4) throw std::invalid_argument("smooth_step_deriv: order must be 0..4");
    if (order == 0) return smooth_step(t);
    return smooth_step_jet(t).d[order];
}

// ---------------------------------------------------------------------------
// Bump

double Bump::value(double x) const {
    const double s = (x - center) / half_width;
    if (std::abs(s) >= 1.0 - 1e-7) return 0.0;
    return amplitude * std::exp(-1.0 / (1.0 - s * s));
}

double Bump::deriv(double x, int order) const {
    if (order < 0 || order > 4) throw std::invalid_argument("Bump::deriv: order must be 0..4");
    if (order == 0) return value(x);
    const double s = (x - center) / half_width;
    if (std::abs(s) >= 1.0 - 1e-7) return 0.0;
    Jet4 sj = Jet4::constant(s);
    sj.d[1] = 1.0 / half_width;
    const Jet4 v = 1.0 - sj * sj;
    const Jet4 h = amplitude * exp(-(Jet4::constant(1.0) / v));
    return h.d[order];
}

double CorrectionBasis::eval_sum(double x, int order, const std::vector<double>* coeffs) const {
    const std::vector<double>& c = coeffs ? *coeffs : u;
    double s = 0.0;
    for (std::size_t m = 0; m < bumps.size(); ++m) {
        if (m < c.size() && c[m] != 0.0) s += c[m] * bumps[m].deriv(x, order);
    }
    return s;
}

std::vector<double> CorrectionBasis::support_knots() const {
    std::vector<double> ks;
    ks.reserve(2 * bumps.size());
    for (const Bump& b : bumps) {
        ks.push_back(b.center - b.half_width);
        ks.push_back(b.center + b.half_width);
    }
    return ks;
}

// ---------------------------------------------------------------------------
// StepPhase

double StepPhase::value(double x) const {
    if (x <= knots.front()) return levels.front();
    if (x >= knots.back()) return levels.back();
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
    return levels[std::min(i, levels.size() - 1)];
}

double StepPhase::min_knot_gap() const {
    double g = knots.back() - knots.front();
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) g = std::min(g, knots[i + 1] - knots[i]);
    return g;
}

void StepPhase::validate() const {
    if (knots.size() < 2 || levels.size() + 1 != knots.size())
        throw std::invalid_argument("StepPhase: need m+1 knots for m levels");
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        if (!(knots[i] < knots[i + 1])) throw std::invalid_argument("StepPhase: knots not increasing");
    if (!(knots.front() < p && p < knots.back()))
        throw std::invalid_argument("StepPhase: split point p not interior");
    if (std::find(knots.begin(), knots.end(), p) == knots.end())
        throw std::invalid_argument("StepPhase: p is not a knot");
}

StepPhase build_g0(const Partition& left, const Partition& right) {
    left.validate();
    right.validate();
    const double p = left.interval[1];
    if (std::abs(right.interval[0] - p) > 1e-12 * (1.0 + std::abs(p)))
        throw std::invalid_argument("build_g0: partitions do not share the split point");

    StepPhase g0;
    g0.p = p;
    g0.knots.push_back(left.interval[0]);
    for (double a : left.breakpoints) g0.knots.push_back(a);
    g0.knots.push_back(p);
    for (double b : right.breakpoints) g0.knots.push_back(b);
    g0.knots.push_back(right.interval[1]);

    // [alpha_m, alpha_{m+1}): pi for m even, 0 for m odd; beta side gets
    // 3pi/2 / pi/2, so the multiplier alternates -1,+1,... then -i,+i,...
    const std::size_t nl = left.breakpoints.size() + 1;
    const std::size_t nr = right.breakpoints.size() + 1;
    for (std::size_t m = 0; m < nl; ++m) g0.levels.push_back(m % 2 == 0 ? kPi : 0.0);
    for (std::size_t m = 0; m < nr; ++m) g0.levels.push_back(m % 2 == 0 ? 1.5 * kPi : 0.5 * kPi);

    g0.validate();
    return g0;
}

// ---------------------------------------------------------------------------
// SmoothPhase

double PhaseSegment::eval(double x, int order) const {
    if (kind == Kind::level) return order == 0 ? from : 0.0;
    const double w = x1 - x0;
    const double t = (x - x0) / w;
    const double scale = (to - from) / std::pow(w, order);
    if (order == 0) return from + (to - from) * smooth_step(t);
    return scale * smooth_step_deriv(t, order);
}

SmoothPhase SmoothPhase::zero(std::array<double, 2> dom) {
    SmoothPhase g;
    g.segments.push_back({PhaseSegment::Kind::level, 0.0, 0.0, dom[0], dom[1]});
    return g;
}

std::array<double, 2> SmoothPhase::domain() const {
    if (segments.empty()) throw std::logic_error("SmoothPhase: empty segment list");
    return {segments.front().x0, segments.back().x1};
}

const PhaseSegment& SmoothPhase::segment_at(double x) const {
    // Last segment whose x0 <= x; clamps outside the domain.
    std::size_t lo = 0, hi = segments.size();
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (segments[mid].x0 <= x)
            lo = mid;
        else
            hi = mid;
    }
    return segments[lo];
}

double SmoothPhase::eval(double x, int order) const {
    double v = segment_at(x).eval(x, order);
    for (const CorrectionBasis& c : corrections) v += c.eval_sum(x, order);
    return v;
}

std::vector<double> SmoothPhase::knots() const {
    std::vector<double> ks;
    ks.reserve(segments.size() + 1);
    for (const PhaseSegment& s : segments) ks.push_back(s.x0);
    ks.push_back(segments.back().x1);
    for (const CorrectionBasis& c : corrections) {
        const std::vector<double> sk = c.support_knots();
        ks.insert(ks.end(), sk.begin(), sk.end());
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

SmoothPhase SmoothPhase::negated() const {
    SmoothPhase g = *this;
    for (PhaseSegment& s : g.segments) {
        s.from = -s.from;
        s.to = -s.to;
    }
    for (CorrectionBasis& c : g.corrections)
        for (double& um : c.u) um = -um;
    return g;
}

void SmoothPhase::validate() const {
    if (segments.empty()) throw std::invalid_argument("SmoothPhase: no segments");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const PhaseSegment& s = segments[i];
        if (!(s.x0 < s.x1)) throw std::invalid_argument("SmoothPhase: degenerate segment");
        if (s.kind == PhaseSegment::Kind::level && s.from != s.to)
            throw std::invalid_argument("SmoothPhase: level segment with from != to");
        if (i + 1 < segments.size()) {
            const PhaseSegment& n = segments[i + 1];
            if (s.x1 != n.x0) throw std::invalid_argument("SmoothPhase: segments do not tile");
            if (s.to != n.from) throw std::invalid_argument("SmoothPhase: value mismatch at knot");
        }
    }
    if (segments.front().kind != PhaseSegment::Kind::level || segments.front().from != 0.0 ||
        segments.back().kind != PhaseSegment::Kind::level || segments.back().from != 0.0)
        throw std::invalid_argument("SmoothPhase: support not compact (outer levels must be 0)");
}

SmoothPhase mollify(const StepPhase& step, double eps) {
    step.validate();
    if (!(eps > 0.0)) throw std::invalid_argument("mollify: eps must be positive");
    if (!(eps < 0.5 * step.min_knot_gap()))
        throw std::invalid_argument("mollify: eps too large (>= half the minimum knot gap)");

    const double a = step.knots.front();
    const double b = step.knots.back();
    const double delta = 0.5 * eps;

    using K = PhaseSegment::Kind;
    std::vector<PhaseSegment> segs;
    segs.push_back({K::level, 0.0, 0.0, a, a + delta});
    segs.push_back({K::ramp, 0.0, step.levels.front(), a + delta, a + delta + eps});

    double cursor = a + delta + eps;
    double level = step.levels.front();
    for (std::size_t i = 1; i + 1 < step.knots.size(); ++i) {
        const double k = step.knots[i];
        const double next = step.levels[i];
        segs.push_back({K::level, level, level, cursor, k - eps});
        segs.push_back({K::ramp, level, next, k - eps, k + eps});
        cursor = k + eps;
        level = next;
    }
    segs.push_back({K::level, level, level, cursor, b - delta - eps});
    segs.push_back({K::ramp, level, 0.0, b - delta - eps, b - delta});
    segs.push_back({K::level, 0.0, 0.0, b - delta, b});

    for (const PhaseSegment& s : segs)
        if (!(s.x0 < s.x1))
            throw std::invalid_argument("mollify: eps too large for the endpoint ramps");

    SmoothPhase g;
    g.segments = std::move(segs);
    g.epsilon = eps;
    g.validate();
    return g;
}

double eval_phase(const SmoothPhase& phase, double x, int order) {
    if (order < 0 || order > 4) throw std::invalid_argument("eval_phase: order must be 0..4");
    return phase.eval(x, order);
}

std::vector<std::string> check_smoothness(const SmoothPhase& phase, int max_order, double rel_tol) {
    std::vector<std::string> failures;

    // Central-difference stencils for derivative orders 1..4.
    static const std::vector<std::vector<std::pair<int, double>>> stencils = {
        {{-1, -0.5}, {1, 0.5}},
        {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
        {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
        {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
    };

    for (std::size_t i = 0; i + 1 < phase.segments.size(); ++i) {
        const double x = phase.segments[i].x1;
        const double wl = phase.segments[i].x1 - phase.segments[i].x0;
        const double wr = phase.segments[i + 1].x1 - phase.segments[i + 1].x0;
        const double h = std::min(wl, wr) / 100.0;

        // Value continuity is exact by construction.
        const double vl = phase.segments[i].eval(x, 0);
        const double vr = phase.segments[i + 1].eval(x, 0);
        if (vl != vr) {
            std::ostringstream os;
            os << "value jump at x=" << x << " (" << vl << " vs " << vr << ")";
            failures.push_back(os.str());
        }

        for (int order = 1; order <= max_order; ++order) {
            double fd = 0.0;
            for (const auto& [off, w] : stencils[order - 1])
                fd += w * phase.eval(x + off * h, 0);
            fd /= std::pow(h, order);
            const double an = phase.eval(x, order);

            // Local derivative scale from both adjacent segments.
            double scale = 1.0;
            for (int s = 0; s <= 8; ++s) {
                const double xs = phase.segments[i].x0 + wl * (s + 0.5) / 9.0;
                const double xr = phase.segments[i + 1].x0 + wr * (s + 0.5) / 9.0;
                scale = std::max({scale, std::abs(phase.eval(xs, order)), std::abs(phase.eval(xr, order))});
            }
            if (std::abs(fd - an) > rel_tol * scale) {
                std::ostringstream os;
                os << "order-" << order << " derivative mismatch at x=" << x << ": fd=" << fd
                   << " analytic=" << an << " scale=" << scale;
                failures.push_back(os.str());
            }
        }
    }
    return failures;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json phase_to_json(const SmoothPhase& phase) {
    nlohmann::json j;
    j["epsilon"] = phase.epsilon;
    j["segments"] = nlohmann::json::array();
    for (const PhaseSegment& s : phase.segments) {
        j["segments"].push_back({{"type", s.kind == PhaseSegment::Kind::level ? "level" : "ramp"},
                                 {"from", s.from},
                                 {"to", s.to},
                                 {"x0", s.x0},
                                 {"x1", s.x1}});
    }
    if (phase.corrections.empty()) {
        j["correction"] = nullptr;
    } else {
        nlohmann::json bumps = nlohmann::json::array();
        nlohmann::json u = nlohmann::json::array();
        nlohmann::json corr;
        // Concatenated corrections flatten into one bump list.
        double eps0 = 0.0;
        for (const CorrectionBasis& c : phase.corrections) {
            eps0 = eps0 == 0.0 ? c.eps0 : std::min(eps0, c.eps0);
            for (std::size_t m = 0; m < c.bumps.size(); ++m) {
                bumps.push_back({{"center", c.bumps[m].center},
                                 {"half_width", c.bumps[m].half_width},
                                 {"amplitude", c.bumps[m].amplitude}});
                u.push_back(m < c.u.size() ? c.u[m] : 0.0);
            }
        }
        corr["bumps"] = std::move(bumps);
        corr["u"] = std::move(u);
        corr["eps0"] = eps0;
        j["correction"] = std::move(corr);
    }
    return j;
}

SmoothPhase phase_from_json(const nlohmann::json& j) {
    SmoothPhase g;
    g.epsilon = j.value("epsilon", 0.0);
    for (const auto& s : j.at("segments")) {
        PhaseSegment seg;
        seg.kind = s.at("type") == "ramp" ? PhaseSegment::Kind::ramp : PhaseSegment::Kind::level;
        seg.from = s.at("from").get<double>();
        seg.to = s.at("to").get<double>();
        seg.x0 = s.at("x0").get<double>();
        seg.x1 = s.at("x1").get<double>();
        g.segments.push_back(seg);
    }
    if (j.contains("correction") && !j.at("correction").is_null()) {
        const auto& c = j.at("correction");
        CorrectionBasis basis;
        basis.eps0 = c.value("eps0", 0.0);
        for (const auto& b : c.at("bumps")) {
            Bump bump;
            bump.center = b.at("center").get<double>();
            bump.half_width = b.at("half_width").get<double>();
            bump.amplitude = b.value("amplitude", 1.0);
            basis.bumps.push_back(bump);
        }
        basis.u = c.at("u").get<std::vector<double>>();
        g.corrections.push_back(std::move(basis));
    }
    if (g.segments.empty()) throw std::invalid_argument("phase_from_json: no segments");
    // Structural invariants are checked by verify(), not here, so that a
    // tampered phase parses and then fails verification.
    return g;
}

std::string phase_samples_csv(const SmoothPhase& phase, int n) {
    if (n < 2) throw std::invalid_argument("phase_samples_csv: need at least 2 samples");
    const auto dom = phase.domain();
    std::string out = "x,g,dg\n";
    char line[128];
    for (int i = 0; i < n; ++i) {
        const double x = dom[0] + (dom[1] - dom[0]) * i / (n - 1);
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", x, phase.eval(x, 0), phase.eval(x, 1));
        out += line;
    }
    return out;
}

} // namespace annihilator
