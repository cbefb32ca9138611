// _obwalks: thin Python face over the library. Strings carry points and
// families; 128-bit coordinates round-trip through their decimal form.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "obwalks/errors.hpp"
#include "obwalks/experiments.hpp"
#include "obwalks/fibration.hpp"
#include "obwalks/limit_laws.hpp"
#include "obwalks/montecarlo.hpp"
#include "obwalks/obstruction.hpp"
#include "obwalks/paths.hpp"
#include "obwalks/points.hpp"
#include "obwalks/version.hpp"

namespace py = pybind11;
using namespace obwalks;
using arith::u64;

namespace {

// Family, prime table, and sigma table bundled behind one handle so repeated
// queries share the sieve.
class SigmaModel {
public:
    SigmaModel(const std::string& family_spec, double pmax)
        : family_(parse_family(family_spec)) {
        if (pmax < 16) throw validation_error("SigmaModel: pmax must be at least 16");
        u64 limit = required_sieve_limit(family_, pmax);
        if (limit > arith::PrimeTable::kLimitCeiling)
            throw capacity_error("SigmaModel: pmax needs a sieve beyond the memory "
                                 "ceiling, lower pmax");
        table_ = std::make_unique<arith::PrimeTable>(limit);
        sigma_ = std::make_unique<SigmaTable>(
            build_sigma_table(family_, static_cast<u64>(pmax), *table_));
    }

    double delta() const { return family_.delta(); }
    double limit() const { return static_cast<double>(sigma_->limit()); }

    double sigma(u64 p) const {
        std::size_t i = sigma_->index_le(static_cast<double>(p));
        if (i == SigmaTable::npos || sigma_->prime(i) != p)
            throw validation_error("sigma: " + std::to_string(p) +
                                   " is not a prime within the table limit");
        return sigma_->sigma(i);
    }

    double S(double T) const { return sigma_->S(T); }
    double variance(double T) const { return sigma_->variance(T); }

    double beta_hat(double T) const {
        if (T < 16) throw validation_error("beta_hat: T must be at least 16");
        return sigma_->S(T) - family_.delta() * std::log(std::log(T));
    }

    py::dict profile(const std::string& point_text) const {
        auto x = parse_point(point_text);
        if (static_cast<double>(x.height()) * max_coefficient() > limit())
            throw validation_error("profile: point height exceeds the table limit, "
                                   "build the model with a larger pmax");
        auto prof = obwalks::profile(family_, x, *table_);
        py::dict out;
        out["point"] = format_point(prof.point);
        out["c"] = arith::to_string(prof.c_value);
        out["obstructing"] = prof.obstructing;
        return out;
    }

    bool is_locally_soluble(const std::string& point_text, u64 p) const {
        return obwalks::is_locally_soluble(family_, parse_point(point_text), p);
    }

    double excess_mass(const std::string& point_text, double P) const {
        auto prof = obwalks::profile(family_, parse_point(point_text), *table_);
        return c_hat(prof, *sigma_, P).value;
    }

    std::vector<std::pair<double, double>> path(const std::string& point_text,
                                                const std::string& kind, double B,
                                                std::size_t grid_m) const {
        auto prof = obwalks::profile(family_, parse_point(point_text), *table_);
        PathSample sample;
        if (kind == "X") {
            sample = path_X(ProfileView(prof), *sigma_, B, grid_m);
        } else if (kind == "Y") {
            sample = path_Y(ProfileView(prof), *sigma_, B, grid_m);
        } else if (kind == "Z") {
            sample = path_Z(ProfileView(prof), *sigma_, B, grid_m);
        } else {
            throw validation_error("path: kind must be X, Y, or Z");
        }
        std::vector<std::pair<double, double>> rows(sample.grid.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            rows[i] = {sample.grid[i], sample.values[i]};
        return rows;
    }

private:
    double max_coefficient() const {
        arith::i64 coef = 1;
        for (const auto& f : family_.forms())
            coef = std::max(coef, std::abs(f.a) + std::abs(f.b));
        return static_cast<double>(coef);
    }

    ConicBundleFamily family_;
    std::unique_ptr<arith::PrimeTable> table_;
    std::unique_ptr<SigmaTable> sigma_;
};

ExperimentConfig config_from_kwargs(const std::string& kind, const std::string& family,
                                    double B, std::size_t n, u64 seed, unsigned threads,
                                    double model_B, const std::string& family_b) {
    ExperimentConfig cfg;
    cfg.kind = parse_experiment_kind(kind);
    cfg.family = family;
    cfg.B = B;
    cfg.n_samples = n;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.model_B = model_B;
    cfg.family_b = family_b;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_obwalks, m) {
    m.doc() = "obstruction statistics for conic bundles over the projective line";
    m.attr("__version__") = kVersion;

    py::register_exception<validation_error>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<capacity_error>(m, "CapacityError", PyExc_MemoryError);
    py::register_exception<numerical_error>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("delta", [](const std::string& family) { return parse_family(family).delta(); },
          py::arg("family"), "half the number of degenerate lines of the family");
    m.def("normalize_family",
          [](const std::string& family) { return format_family(parse_family(family)); },
          py::arg("family"));
    m.def("klapaklapa_point",
          [](unsigned N) {
              arith::PrimeTable table(256);
              return format_point(klapaklapa_point(N, table));
          },
          py::arg("N"), "(1 : q_1 ... q_N) over the ascending primes q = 3 (mod 4)");

    m.def("gaussian_cdf", &gaussian_cdf, py::arg("z"));
    m.def("arcsine_cdf", &arcsine_cdf, py::arg("u"));
    m.def("tau_infinity", &tau_infinity, py::arg("z"),
          "CDF of the absolute maximum of Brownian motion on [0, 1]");
    m.def("tau2", &tau2, py::arg("z"),
          "CDF of the integral of squared Brownian motion on [0, 1]");

    m.def("walk_functionals",
          [](std::size_t n_steps, u64 seed) {
              SplitMix64 rng(seed);
              auto f = walk_functionals(n_steps, rng);
              return py::make_tuple(f.max, f.absmax, f.occupation, f.l2);
          },
          py::arg("n_steps"), py::arg("seed"),
          "(max, absmax, occupation, l2) of one scaled walk");

    py::class_<SigmaModel>(m, "SigmaModel")
        .def(py::init<const std::string&, double>(), py::arg("family"), py::arg("pmax"))
        .def_property_readonly("delta", &SigmaModel::delta)
        .def_property_readonly("limit", &SigmaModel::limit)
        .def("sigma", &SigmaModel::sigma, py::arg("p"))
        .def("S", &SigmaModel::S, py::arg("T"))
        .def("variance", &SigmaModel::variance, py::arg("T"))
        .def("beta_hat", &SigmaModel::beta_hat, py::arg("T"))
        .def("profile", &SigmaModel::profile, py::arg("point"))
        .def("is_locally_soluble", &SigmaModel::is_locally_soluble, py::arg("point"),
             py::arg("p"))
        .def("excess_mass", &SigmaModel::excess_mass, py::arg("point"), py::arg("P"))
        .def("path", &SigmaModel::path, py::arg("point"), py::arg("kind"), py::arg("B"),
             py::arg("grid_m") = 256);

    m.def("run_experiment_json",
          [](const std::string& kind, const std::string& family, double B, std::size_t n,
             u64 seed, unsigned threads, double model_B, const std::string& family_b) {
              auto cfg = config_from_kwargs(kind, family, B, n, seed, threads, model_B,
                                            family_b);
              py::gil_scoped_release release;
              auto rep = family_b.empty() ? run(cfg) : compare_delta_effect(cfg);
              return report_to_json(rep);
          },
          py::arg("kind"), py::arg("family") = "s,t", py::arg("B") = 1e4,
          py::arg("n") = 1000, py::arg("seed") = 1, py::arg("threads") = 0,
          py::arg("model_B") = 0.0, py::arg("family_b") = std::string(),
          "full experiment report as a JSON string");
}
