#include "obsgram/systems.hpp"

#include <cmath>
#include <stdexcept>

namespace obsgram {

namespace {

double require_scalar(const SystemParams& params, const std::string& system,
                      const std::string& key) {
    auto it = params.scalars.find(key);
    if (it == params.scalars.end()) {
        throw std::invalid_argument("build_system(" + system + "): missing required param '" +
                                    key + "'");
    }
    return it->second;
}

const Matrix& require_matrix(const SystemParams& params, const std::string& system,
                             const std::string& key) {
    auto it = params.matrices.find(key);
    if (it == params.matrices.end()) {
        throw std::invalid_argument("build_system(" + system + "): missing required matrix '" +
                                    key + "'");
    }
    return it->second;
}

double nonnegative(double q, const std::string& system) {
    if (!(q >= 0.0)) {
        throw std::invalid_argument("build_system(" + system + "): q must be >= 0");
    }
    return q;
}

Matrix no_diffusion(int n) {
    return Matrix::Zero(n, 0);
}

void check_psd(const Matrix& s, const char* what) {
    const double scale = std::max(1.0, s.norm());
    if ((s - s.transpose()).norm() > 1e-8 * scale) {
        throw std::invalid_argument(std::string(what) + " must be symmetric");
    }
    const Vector lambda = sym_eig(s).values;
    if (lambda(0) < -1e-10 * std::max(1.0, lambda(lambda.size() - 1))) {
        throw std::invalid_argument(std::string(what) + " must be positive semidefinite");
    }
}

}  // namespace

ControlSignal ControlSignal::zero(int dim) {
    return {dim, [dim](double) { return Vector::Zero(dim); }, "zero"};
}

ControlSignal ControlSignal::constant(const Vector& value) {
    std::string desc = "constant(";
    for (Eigen::Index i = 0; i < value.size(); ++i) {
        desc += (i ? "," : "") + std::to_string(value(i));
    }
    desc += ")";
    return {static_cast<int>(value.size()), [value](double) { return value; }, desc};
}

ControlSignal ControlSignal::piecewise(const std::vector<double>& times,
                                       const std::vector<Vector>& values) {
    if (times.empty() || times.size() != values.size()) {
        throw std::invalid_argument("ControlSignal::piecewise: times/values size mismatch");
    }
    if (times.front() != 0.0) {
        throw std::invalid_argument("ControlSignal::piecewise: first breakpoint must be 0");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) {
            throw std::invalid_argument(
                "ControlSignal::piecewise: breakpoints must be strictly increasing");
        }
    }
    const int dim = static_cast<int>(values.front().size());
    for (const Vector& v : values) {
        if (v.size() != dim) {
            throw std::invalid_argument("ControlSignal::piecewise: inconsistent value dimension");
        }
    }
    auto fn = [times, values](double t) {
        std::size_t k = times.size();
        while (k > 0 && times[k - 1] > t) --k;
        return values[k == 0 ? 0 : k - 1];
    };
    return {dim, fn, "piecewise(" + std::to_string(times.size()) + " pieces)"};
}

void LinearAdditiveSpec::validate() const {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || C.cols() != n || Omega.rows() != n || mean0.size() != n ||
        cov0.rows() != n || cov0.cols() != n) {
        throw std::invalid_argument("LinearAdditiveSpec: inconsistent dimensions");
    }
    require_finite(A, "LinearAdditiveSpec.A");
    require_finite(C, "LinearAdditiveSpec.C");
    require_finite(Omega, "LinearAdditiveSpec.Omega");
    check_psd(cov0, "LinearAdditiveSpec.cov0");
}

void LinearMultiplicativeSpec::validate() const {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || C.cols() != n || mean0.size() != n || second_moment0.rows() != n ||
        second_moment0.cols() != n) {
        throw std::invalid_argument("LinearMultiplicativeSpec: inconsistent dimensions");
    }
    for (const Matrix& omega : Omegas) {
        if (omega.rows() != n || omega.cols() != n) {
            throw std::invalid_argument("LinearMultiplicativeSpec: Omega_j must be n x n");
        }
        require_finite(omega, "LinearMultiplicativeSpec.Omega_j");
    }
    check_psd(second_moment0, "LinearMultiplicativeSpec.second_moment0");
    check_psd(second_moment0 - mean0 * mean0.transpose(),
              "LinearMultiplicativeSpec implied covariance");
}

SystemModel build_system(const std::string& name, const SystemParams& params) {
    SystemModel sys;
    sys.name = name;
    if (name == "oscillator") {
        sys.n = 2; sys.m = 0; sys.p = 1; sys.q_w = 0;
        sys.drift = [](const Vector& x, const Vector&) {
            Vector d(2); d << -x(1), x(0); return d;
        };
        sys.diffusion = [](const Vector&, const Vector&) { return no_diffusion(2); };
        sys.output = [](const Vector& x) { return Vector::Constant(1, x(1)); };
    } else if (name == "oscillator_unobs") {
        sys.n = 2; sys.m = 0; sys.p = 1; sys.q_w = 0;
        sys.drift = [](const Vector& x, const Vector&) {
            Vector d(2); d << -x(1), 0.0; return d;
        };
        sys.diffusion = [](const Vector&, const Vector&) { return no_diffusion(2); };
        sys.output = [](const Vector& x) { return Vector::Constant(1, x(1)); };
    } else if (name == "unicycle_det" || name == "unicycle_sde") {
        sys.n = 4; sys.m = 2; sys.p = 2;
        sys.drift = [](const Vector& x, const Vector& u) {
            Vector d(4);
            d << x(3) * std::cos(x(2)), x(3) * std::sin(x(2)), u(0), u(1);
            return d;
        };
        sys.output = [](const Vector& x) { return Vector(x.head(2)); };
        if (name == "unicycle_det") {
            sys.q_w = 0;
            sys.diffusion = [](const Vector&, const Vector&) { return no_diffusion(4); };
        } else {
            const double q = nonnegative(require_scalar(params, name, "q"), name);
            auto flag = params.scalars.find("noise_on_heading");
            const bool on_heading = flag != params.scalars.end() && flag->second != 0.0;
            const int row = on_heading ? 2 : 3;
            // q = 0 switches the noise channel off entirely so the simulator
            // can take the higher-order deterministic integrator.
            sys.q_w = q > 0.0 ? 1 : 0;
            sys.params["q"] = q;
            sys.params["noise_on_heading"] = on_heading ? 1.0 : 0.0;
            if (q > 0.0) {
                sys.diffusion = [q, row](const Vector&, const Vector&) {
                    Matrix g = Matrix::Zero(4, 1);
                    g(row, 0) = q;
                    return g;
                };
            } else {
                sys.diffusion = [](const Vector&, const Vector&) { return no_diffusion(4); };
            }
        }
    } else if (name == "noise_affine") {
        const double q = nonnegative(require_scalar(params, name, "q"), name);
        sys.n = 2; sys.m = 1; sys.p = 1;
        sys.q_w = q > 0.0 ? 1 : 0;
        sys.params["q"] = q;
        sys.drift = [](const Vector& x, const Vector& u) {
            Vector d(2); d << -x(1), x(0) * u(0); return d;
        };
        if (q > 0.0) {
            sys.diffusion = [q](const Vector& x, const Vector&) {
                Matrix g = Matrix::Zero(2, 1);
                g(1, 0) = q * x(0);
                return g;
            };
        } else {
            sys.diffusion = [](const Vector&, const Vector&) { return no_diffusion(2); };
        }
        sys.output = [](const Vector& x) { return Vector::Constant(1, x(1)); };
    } else if (name == "noise_affine_tradeoff") {
        const double q = nonnegative(require_scalar(params, name, "q"), name);
        const double v = require_scalar(params, name, "v");
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("build_system(noise_affine_tradeoff): v must lie in [0,1]");
        }
        sys.n = 2; sys.m = 1; sys.p = 1;
        sys.q_w = (q > 0.0 && v > 0.0) ? 1 : 0;
        sys.params["q"] = q;
        sys.params["v"] = v;
        sys.drift = [v](const Vector& x, const Vector& u) {
            Vector d(2); d << -x(1), x(0) * (1.0 - v) * u(0); return d;
        };
        if (q > 0.0 && v > 0.0) {
            sys.diffusion = [q, v](const Vector& x, const Vector&) {
                Matrix g = Matrix::Zero(2, 1);
                g(1, 0) = v * q * x(0);
                return g;
            };
        } else {
            sys.diffusion = [](const Vector&, const Vector&) { return no_diffusion(2); };
        }
        sys.output = [](const Vector& x) { return Vector::Constant(1, x(1)); };
    } else if (name == "sigma_nl") {
        sys.n = 2; sys.m = 0; sys.p = 1; sys.q_w = 0;
        sys.drift = [](const Vector& x, const Vector&) {
            Vector d(2); d << -x(0) + 0.5 * x(1) * x(1), -x(1); return d;
        };
        sys.diffusion = [](const Vector&, const Vector&) { return no_diffusion(2); };
        sys.output = [](const Vector& x) { return Vector::Constant(1, x(0)); };
    } else if (name == "sigma_l") {
        sys.n = 2; sys.m = 0; sys.p = 1; sys.q_w = 0;
        sys.drift = [](const Vector& x, const Vector&) { return Vector(-x); };
        sys.diffusion = [](const Vector&, const Vector&) { return no_diffusion(2); };
        sys.output = [](const Vector& x) { return Vector::Constant(1, x(0)); };
    } else if (name == "sigma_sde") {
        sys.n = 2; sys.m = 0; sys.p = 1; sys.q_w = 1;
        sys.drift = [](const Vector& x, const Vector&) { return Vector(-x); };
        sys.diffusion = [](const Vector& x, const Vector&) {
            Matrix g = Matrix::Zero(2, 1);
            g(0, 0) = 0.5 * x(1) * x(1);
            return g;
        };
        sys.output = [](const Vector& x) { return Vector::Constant(1, x(0)); };
    } else if (name == "ou_linear") {
        LinearAdditiveSpec spec;
        spec.A = require_matrix(params, name, "A");
        spec.C = require_matrix(params, name, "C");
        spec.Omega = require_matrix(params, name, "Omega");
        const Eigen::Index n = spec.A.rows();
        spec.mean0 = Vector::Zero(n);
        spec.cov0 = Matrix::Zero(n, n);
        spec.validate();
        return linear_to_model(spec);
    } else if (name == "bs_linear") {
        LinearMultiplicativeSpec spec;
        spec.A = require_matrix(params, name, "A");
        spec.C = require_matrix(params, name, "C");
        for (int j = 1;; ++j) {
            auto it = params.matrices.find("Omega" + std::to_string(j));
            if (it == params.matrices.end()) break;
            spec.Omegas.push_back(it->second);
        }
        if (spec.Omegas.empty()) {
            throw std::invalid_argument("build_system(bs_linear): needs Omega1..OmegaK matrices");
        }
        const Eigen::Index n = spec.A.rows();
        spec.mean0 = Vector::Zero(n);
        spec.second_moment0 = Matrix::Zero(n, n);
        spec.validate();
        return linear_to_model(spec);
    } else {
        throw std::invalid_argument(
            "build_system: unknown system '" + name +
            "' (known: oscillator, oscillator_unobs, unicycle_det, unicycle_sde, noise_affine, "
            "noise_affine_tradeoff, sigma_nl, sigma_l, sigma_sde, ou_linear, bs_linear)");
    }
    return sys;
}

ControlSignal default_control(const SystemModel& model) {
    if (model.name == "noise_affine" || model.name == "noise_affine_tradeoff") {
        return ControlSignal::constant(Vector::Constant(1, 0.1));
    }
    if (model.name == "unicycle_det" || model.name == "unicycle_sde") {
        Vector u(2);
        u << 0.0, 1.0;
        return ControlSignal::constant(u);
    }
    return ControlSignal::zero(model.m);
}

SystemModel linear_to_model(const LinearAdditiveSpec& spec) {
    spec.validate();
    SystemModel sys;
    sys.name = "ou_linear";
    sys.n = static_cast<int>(spec.A.rows());
    sys.m = 0;
    sys.p = static_cast<int>(spec.C.rows());
    sys.q_w = static_cast<int>(spec.Omega.cols());
    const Matrix a = spec.A;
    const Matrix c = spec.C;
    const Matrix omega = spec.Omega;
    sys.drift = [a](const Vector& x, const Vector&) { return Vector(a * x); };
    sys.diffusion = [omega](const Vector&, const Vector&) { return omega; };
    sys.output = [c](const Vector& x) { return Vector(c * x); };
    return sys;
}

SystemModel linear_to_model(const LinearMultiplicativeSpec& spec) {
    spec.validate();
    SystemModel sys;
    sys.name = "bs_linear";
    sys.n = static_cast<int>(spec.A.rows());
    sys.m = 0;
    sys.p = static_cast<int>(spec.C.rows());
    sys.q_w = static_cast<int>(spec.Omegas.size());
    const Matrix a = spec.A;
    const Matrix c = spec.C;
    const std::vector<Matrix> omegas = spec.Omegas;
    sys.drift = [a](const Vector& x, const Vector&) { return Vector(a * x); };
    sys.diffusion = [omegas](const Vector& x, const Vector&) {
        Matrix g(x.size(), static_cast<Eigen::Index>(omegas.size()));
        for (std::size_t j = 0; j < omegas.size(); ++j) {
            g.col(static_cast<Eigen::Index>(j)) = omegas[j] * x;
        }
        return g;
    };
    sys.output = [c](const Vector& x) { return Vector(c * x); };
    return sys;
}

}  // namespace obsgram
