#include "lsta/numerics/gradcheck.hpp"

#include "lsta/numerics/rng.hpp"

#include <algorithm>
#include <cmath>

namespace lsta {

namespace {

double evaluate(const std::function<Tensor()>& f)
{
    NoGradGuard guard;
    const double value = f().item();
    if (!std::isfinite(value)) throw NumericError("gradcheck: objective is non-finite");
    return value;
}

double relative_error(double analytic, double numeric, double floor)
{
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

// Derivative at 0 of a function sampled by `at`, tolerant of slope
// discontinuities near 0. One-sided slopes at h, h/2, h/4 fall on a line in
// h when that side is smooth and bend when a kink lies inside. If both
// sides bend, the window shrinks until one of them is clean. Differences
// below 1e-5 of `floor` (the error-denominator floor) count as noise.
double guarded_slope(const std::function<double(double)>& at, double h, double floor)
{
    const double f0 = at(0.0);
    double best = 0.0;
    for (int round = 0; round < 8; ++round, h /= 4.0) {
        const double p1 = at(h), p2 = at(h / 2), p4 = at(h / 4);
        const double m1 = at(-h), m2 = at(-h / 2), m4 = at(-h / 4);
        const double central = (4.0 * (p2 - m2) / h - (p1 - m1) / (2.0 * h)) / 3.0;

        const double f1 = (p1 - f0) / h, f2 = (p2 - f0) / (h / 2), f4 = (p4 - f0) / (h / 4);
        const double b1 = (f0 - m1) / h, b2 = (f0 - m2) / (h / 2), b4 = (f0 - m4) / (h / 4);
        const double fwd = (8.0 * f4 - 6.0 * f2 + f1) / 3.0;
        const double bwd = (8.0 * b4 - 6.0 * b2 + b1) / 3.0;
        const double tol = 1e-5 * std::max({std::abs(fwd), std::abs(bwd), std::abs(central), floor});
        const double fwd_bend = std::abs((f1 - f2) - 2.0 * (f2 - f4));
        const double bwd_bend = std::abs((b1 - b2) - 2.0 * (b2 - b4));
        const bool fwd_clean = fwd_bend <= tol, bwd_clean = bwd_bend <= tol;
        if (fwd_clean && bwd_clean && std::abs(fwd - bwd) <= tol) return central;
        if (fwd_clean != bwd_clean) return fwd_clean ? fwd : bwd;
        best = fwd_bend <= bwd_bend ? fwd : bwd;
    }
    return best;
}

} // namespace

GradcheckReport finite_diff_gradcheck(const std::function<Tensor()>& f, ParameterStore& params,
                                      const GradcheckOptions& options)
{
    if (!(options.step > 0.0)) throw std::invalid_argument("gradcheck: step must be positive");

    params.clear_grad();
    {
        Tensor out = f();
        if (!std::isfinite(out.item())) throw NumericError("gradcheck: objective is non-finite");
        out.backward();
    }
    std::vector<std::vector<double>> analytic;
    for (auto& [name, p] : params) {
        if (p.has_grad()) {
            analytic.emplace_back(p.grad().begin(), p.grad().end());
        } else {
            analytic.emplace_back(p.size(), 0.0);
        }
    }
    params.clear_grad();

    double largest = 0.0;
    for (const auto& g : analytic) {
        for (double v : g) largest = std::max(largest, std::abs(v));
    }
    const double floor = std::max(options.floor, options.relative_floor * largest);

    GradcheckReport report;
    Rng rng(options.seed);
    std::vector<Tensor*> tensors;
    std::vector<std::string> names;
    for (auto& [name, p] : params) {
        tensors.push_back(&p);
        names.push_back(name);
    }

    auto record = [&](double err, std::string where) {
        ++report.checks;
        if (err > report.max_relative_error || report.checks == 1) {
            report.max_relative_error = err;
            report.worst = std::move(where);
        }
    };

    if (options.mode == GradcheckOptions::Mode::Coordinates) {
        std::vector<std::pair<std::size_t, std::size_t>> coords;
        for (std::size_t t = 0; t < tensors.size(); ++t) {
            for (std::size_t i = 0; i < tensors[t]->size(); ++i) coords.emplace_back(t, i);
        }
        if (options.max_coordinates > 0 && coords.size() > options.max_coordinates) {
            auto order = rng.permutation(coords.size());
            std::vector<std::pair<std::size_t, std::size_t>> picked;
            for (std::size_t k = 0; k < options.max_coordinates; ++k) picked.push_back(coords[order[k]]);
            std::sort(picked.begin(), picked.end());
            coords = std::move(picked);
        }
        for (auto [t, i] : coords) {
            auto values = tensors[t]->mutable_values();
            const double original = values[i];
            const double h = options.step * std::max(1.0, std::abs(original));
            auto at = [&](double offset) {
                values[i] = original + offset;
                const double v = evaluate(f);
                values[i] = original;
                return v;
            };
            const double numeric = options.kink_guard ? guarded_slope(at, h, floor) : (at(h) - at(-h)) / (2.0 * h);
            record(relative_error(analytic[t][i], numeric, floor),
                   names[t] + "[" + std::to_string(i) + "]");
        }
    } else {
        for (std::size_t k = 0; k < options.probes; ++k) {
            std::vector<std::vector<double>> direction(tensors.size());
            double norm = 0.0;
            for (std::size_t t = 0; t < tensors.size(); ++t) {
                direction[t].resize(tensors[t]->size());
                for (auto& d : direction[t]) {
                    d = rng.normal();
                    norm += d * d;
                }
            }
            norm = std::sqrt(norm);
            double analytic_dir = 0.0;
            std::vector<std::vector<double>> originals(tensors.size());
            for (std::size_t t = 0; t < tensors.size(); ++t) {
                auto values = tensors[t]->values();
                originals[t].assign(values.begin(), values.end());
                for (std::size_t i = 0; i < direction[t].size(); ++i) {
                    direction[t][i] /= norm;
                    analytic_dir += analytic[t][i] * direction[t][i];
                }
            }
            auto shift = [&](double amount) {
                for (std::size_t t = 0; t < tensors.size(); ++t) {
                    auto values = tensors[t]->mutable_values();
                    for (std::size_t i = 0; i < values.size(); ++i) {
                        values[i] = originals[t][i] + amount * direction[t][i];
                    }
                }
            };
            const double h = options.step;
            shift(h);
            const double plus = evaluate(f);
            shift(-h);
            const double minus = evaluate(f);
            shift(0.0);
            const double numeric = (plus - minus) / (2.0 * h);
            record(relative_error(analytic_dir, numeric, floor), "probe " + std::to_string(k));
        }
    }
    return report;
}

} // namespace lsta
