#include "volterra/expsum_fit.hpp"

#include "volterra/parallel.hpp"
#include "volterra/rng.hpp"
#include "volterra/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace volterra {

double expsum_fit_loss(const ShiftedFractional& frac, const ExponentialSum& sum, double horizon) {
    frac.validate();
    sum.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("expsum_fit_loss: horizon must be > 0");
    for (Eigen::Index i = 0; i < sum.count(); ++i)
        if (!(sum.rates[i] > 0.0))
            throw std::invalid_argument("expsum_fit_loss: cross term requires rates > 0");

    const double T = horizon;
    double self_term = 0.0;
    for (Eigen::Index i = 0; i < sum.count(); ++i)
        for (Eigen::Index j = 0; j < sum.count(); ++j) {
            const double s = sum.rates[i] + sum.rates[j];
            self_term += sum.weights[i] * sum.weights[j] * (-std::expm1(-s * T)) / s;
        }

    const double q = 2.0 * frac.exponent - 1.0;
    const double frac_term = frac.scale * frac.scale *
        (std::pow(T + frac.shift, q) - (frac.shift > 0.0 ? std::pow(frac.shift, q) : 0.0)) / q;

    const double gamma_nu = gamma_fn(frac.exponent);
    double cross_term = 0.0;
    for (Eigen::Index i = 0; i < sum.count(); ++i) {
        const double tail =
            scaled_gamma_tail_difference(frac.exponent, frac.shift, T, sum.rates[i]);
        cross_term += sum.weights[i] * gamma_nu * tail / std::pow(sum.rates[i], frac.exponent);
    }
    return self_term + frac_term - 2.0 * frac.scale * cross_term;
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, double initial_step,
                             int max_evaluations, double f_tolerance) {
    const int n = static_cast<int>(start.size());
    std::vector<Eigen::VectorXd> pts(n + 1, start);
    std::vector<double> vals(n + 1);
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : 1e300;
    };
    for (int i = 1; i <= n; ++i) pts[i][i - 1] += initial_step;
    for (int i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    auto order = [&] {
        for (int i = 1; i <= n; ++i) {
            int j = i;
            while (j > 0 && vals[j] < vals[j - 1]) {
                std::swap(vals[j], vals[j - 1]);
                std::swap(pts[j], pts[j - 1]);
                --j;
            }
        }
    };
    order();

    NelderMeadResult out;
    while (evals < max_evaluations) {
        if (std::abs(vals[n] - vals[0]) <= f_tolerance * (std::abs(vals[0]) + 1e-30) + 1e-300) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd refl = centroid + (centroid - pts[n]);
        const double frefl = eval(refl);
        if (frefl < vals[0]) {
            const Eigen::VectorXd expa = centroid + 2.0 * (centroid - pts[n]);
            const double fexpa = eval(expa);
            if (fexpa < frefl) { pts[n] = expa; vals[n] = fexpa; }
            else { pts[n] = refl; vals[n] = frefl; }
        } else if (frefl < vals[n - 1]) {
            pts[n] = refl;
            vals[n] = frefl;
        } else {
            const Eigen::VectorXd contr =
                centroid + 0.5 * ((frefl < vals[n] ? refl : pts[n]) - centroid);
            const double fcontr = eval(contr);
            if (fcontr < std::min(frefl, vals[n])) {
                pts[n] = contr;
                vals[n] = fcontr;
            } else {
                for (int i = 1; i <= n; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = eval(pts[i]);
                }
            }
        }
        order();
    }
    out.x = pts[0];
    out.value = vals[0];
    out.evaluations = evals;
    return out;
}

namespace {

constexpr double kLogWeightClamp = 40.0;

ExponentialSum decode(const Eigen::VectorXd& params, double rate_cap) {
    const Eigen::Index p = params.size() / 2;
    ExponentialSum e;
    e.weights.resize(p);
    e.rates.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        e.weights[i] = std::exp(std::clamp(params[i], -kLogWeightClamp, kLogWeightClamp));
        e.rates[i] = std::min(std::exp(std::clamp(params[p + i], -kLogWeightClamp,
                                                  kLogWeightClamp)),
                              rate_cap);
    }
    return e;
}

ExponentialSum sorted_by_rate(const ExponentialSum& e) {
    std::vector<Eigen::Index> idx(e.count());
    for (Eigen::Index i = 0; i < e.count(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](Eigen::Index a, Eigen::Index b) { return e.rates[a] < e.rates[b]; });
    ExponentialSum out;
    out.weights.resize(e.count());
    out.rates.resize(e.count());
    for (Eigen::Index i = 0; i < e.count(); ++i) {
        out.weights[i] = e.weights[idx[i]];
        out.rates[i] = e.rates[idx[i]];
    }
    return out;
}

}  // namespace

ExpSumFit fit_exponential_sum(const ShiftedFractional& frac, int terms, double horizon,
                              const FitOptions& options, const ExponentialSum* warm_start) {
    if (terms < 1) throw std::invalid_argument("fit_exponential_sum: need p >= 1");
    frac.validate();

    const int dim = 2 * terms;
    auto objective = [&](const Eigen::VectorXd& params) {
        return expsum_fit_loss(frac, decode(params, options.rate_cap), horizon);
    };

    std::vector<Eigen::VectorXd> starts;
    if (warm_start && warm_start->count() == terms - 1 && terms > 1) {
        // Seed with the previous fit plus one new time scale across a rate ladder.
        for (double log10_rate : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0}) {
            Eigen::VectorXd s(dim);
            for (int i = 0; i < terms - 1; ++i) {
                s[i] = std::log(warm_start->weights[i]);
                s[terms + i] = std::log(std::max(warm_start->rates[i], 1e-12));
            }
            s[terms - 1] = std::log(std::max(0.5 * warm_start->weights[terms - 2], 1e-3));
            s[2 * terms - 1] = log10_rate * std::log(10.0);
            starts.push_back(s);
        }
    }
    CounterRng rng(options.seed, static_cast<std::uint64_t>(terms));
    for (int k = 0; k < options.multistart; ++k) {
        Eigen::VectorXd s(dim);
        for (int i = 0; i < terms; ++i) {
            s[i] = -2.0 + 5.0 * rng.next_uniform();                        // log weight
            s[terms + i] = -2.0 + (std::log(1e5) + 2.0) * rng.next_uniform();  // log rate
        }
        starts.push_back(s);
    }

    std::vector<NelderMeadResult> results(starts.size());
    parallel_for(static_cast<std::ptrdiff_t>(starts.size()), options.threads,
                 [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
                     for (std::ptrdiff_t i = lo; i < hi; ++i) {
                         auto r = nelder_mead(objective, starts[i], 0.7,
                                              options.max_evaluations / 2, 1e-13);
                         results[i] = nelder_mead(objective, r.x, 0.05,
                                                  options.max_evaluations / 2, 1e-15);
                     }
                 });

    // Deterministic reduction: best loss, ties toward the smallest rate sum.
    int best = -1;
    double best_loss = std::numeric_limits<double>::infinity();
    double best_rate_sum = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(results.size()); ++i) {
        const ExponentialSum cand = decode(results[i].x, options.rate_cap);
        const double rate_sum = cand.rates.sum();
        const bool better = results[i].value < best_loss - 1e-14 ||
                            (std::abs(results[i].value - best_loss) <= 1e-14 &&
                             rate_sum < best_rate_sum);
        if (better) {
            best = i;
            best_loss = results[i].value;
            best_rate_sum = rate_sum;
        }
    }

    ExpSumFit fit;
    fit.kernel = sorted_by_rate(decode(results[best].x, options.rate_cap));
    fit.loss = best_loss;
    fit.converged = results[best].converged;
    if (warm_start && warm_start->count() == terms - 1 && terms > 1) {
        // Nesting guard: never report worse than the incremental seed itself.
        ExponentialSum seed;
        seed.weights.resize(terms);
        seed.rates.resize(terms);
        seed.weights.head(terms - 1) = warm_start->weights;
        seed.rates.head(terms - 1) = warm_start->rates;
        seed.weights[terms - 1] = 1e-12;
        seed.rates[terms - 1] = 1.0;
        const double seed_loss = expsum_fit_loss(frac, seed, horizon);
        if (seed_loss < fit.loss) {
            fit.kernel = sorted_by_rate(seed);
            fit.loss = seed_loss;
        }
    }
    return fit;
}

std::vector<ExpSumFit> fit_exponential_sum_table(const ShiftedFractional& frac, int max_terms,
                                                 double horizon, const FitOptions& options) {
    std::vector<ExpSumFit> table;
    const ExponentialSum* warm = nullptr;
    for (int p = 1; p <= max_terms; ++p) {
        table.push_back(fit_exponential_sum(frac, p, horizon, options, warm));
        warm = &table.back().kernel;
    }
    return table;
}

}  // namespace volterra
