#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nf {

using PointRef = Eigen::Ref<const Eigen::VectorXd>;

/// Scalar spatial profile phi(x). Used for initial conditions, the spatial
/// part of inputs, and test functions. Parametric kinds act on the first
/// coordinate unless stated otherwise.
class Profile {
public:
    enum class Kind { zero, constant, linear, sine, cosine, bump, custom };

    static Profile zero();
    static Profile constant(double value);
    /// offset + slope * x_0
    static Profile linear(double offset, double slope);
    /// offset + amplitude * sin(mode * pi * x_0)
    static Profile sine(double amplitude, double mode, double offset = 0.0);
    /// offset + amplitude * cos(mode * pi * x_0)
    static Profile cosine(double amplitude, double mode, double offset = 0.0);
    /// offset + amplitude * exp(-|x - center|^2 / (2 width^2)), center on the diagonal
    static Profile bump(double amplitude, double center, double width, double offset = 0.0);
    /// `sup` is a declared bound on |phi|, `lipschitz` on |grad phi|.
    static Profile custom(std::function<double(PointRef)> fn, double sup, double lipschitz);

    double operator()(PointRef x) const;

    Kind kind() const { return kind_; }
    /// Upper bound on |phi| over [0,1]^d-style domains (exact for parametric kinds).
    double sup_bound() const;
    /// Upper bound on |grad phi|.
    double gradient_bound() const;
    bool is_zero() const { return kind_ == Kind::zero; }

private:
    Kind kind_ = Kind::zero;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;
    std::function<double(PointRef)> custom_;
};

/// Non-negative, bounded, globally Lipschitz gain function f.
class GainFunction {
public:
    enum class Kind { logistic, tanh, constant, affine, table };

    /// f(z) = 1 / (1 + exp(-(beta1 z + beta2)))
    static GainFunction logistic(double beta1, double beta2);
    /// f(z) = (tanh(beta1 z + beta2) + 1) / 2
    static GainFunction tanh(double beta1, double beta2);
    static GainFunction constant(double value);
    /// f(z) = clamp(a z + b, 0, upper); affine on the range where the clamp is inactive.
    static GainFunction affine(double a, double b, double upper);
    /// Piecewise-linear interpolation of (xs, ys), constant beyond the ends.
    /// The declared bounds are verified by dense sampling; throws if they fail.
    static GainFunction table(std::vector<double> xs, std::vector<double> ys, double declared_sup,
                              double declared_lipschitz);

    double operator()(double z) const;
    double derivative(double z) const;

    Kind kind() const { return kind_; }
    double sup_norm() const { return sup_; }
    double lipschitz() const { return lipschitz_; }
    double beta1() const { return p1_; }
    double beta2() const { return p2_; }

    bool is_affine() const { return kind_ == Kind::affine || kind_ == Kind::constant; }
    /// Slope and intercept on the linear range (constant gain: slope 0).
    double affine_slope() const;
    double affine_intercept() const;

    std::string describe() const;

private:
    Kind kind_ = Kind::constant;
    double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
    double sup_ = 0.0;
    double lipschitz_ = 0.0;
    std::vector<double> xs_, ys_;
};

/// Connectivity kernel w(x, y) on D x D.
class Kernel {
public:
    enum class Kind { zero, constant, gaussian, mexican_hat, linear_sum, custom };

    static Kernel zero();
    static Kernel constant(double value);
    /// amplitude * exp(-|x - y|^2 / (2 sigma^2))
    static Kernel gaussian(double amplitude, double sigma);
    /// Difference of Gaussians: excitatory minus inhibitory.
    static Kernel mexican_hat(double a_exc, double s_exc, double a_inh, double s_inh);
    /// c0 + c1 * sum_i (x_i + y_i)
    static Kernel linear_sum(double c0, double c1);
    static Kernel custom(std::function<double(PointRef, PointRef)> fn);

    double operator()(PointRef x, PointRef y) const;
    Kind kind() const { return kind_; }

private:
    Kind kind_ = Kind::zero;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;
    std::function<double(PointRef, PointRef)> custom_;
};

/// Time modulation m(t) multiplying the spatial input profile.
struct Modulation {
    enum class Kind { none, sinusoid } kind = Kind::none;
    double amplitude = 0.0;
    double omega = 0.0;

    double operator()(double t) const;
    double sup_abs() const;
};

/// External input I(t, x). Separable inputs are profile(x) * modulation(t);
/// general inputs use a custom evaluator.
class InputCurrent {
public:
    InputCurrent() = default;
    explicit InputCurrent(Profile profile, Modulation modulation = {});
    static InputCurrent zero() { return InputCurrent(Profile::zero()); }
    /// General I(t, x). `bound` is the declared sup |I| on the simulation
    /// horizon; pass a negative value for an unbounded input.
    static InputCurrent custom(std::function<double(double, PointRef)> fn, double bound,
                               bool time_independent);

    double operator()(double t, PointRef x) const;

    bool is_separable() const { return !custom_; }
    bool time_independent() const;
    bool bounded() const { return bound_ >= 0.0; }
    /// Declared sup over (t, x) of |I|; negative when unbounded.
    double bound() const { return bound_; }
    const Profile& profile() const { return profile_; }
    const Modulation& modulation() const { return modulation_; }

private:
    Profile profile_;
    Modulation modulation_;
    std::function<double(double, PointRef)> custom_;
    double bound_ = 0.0;
    bool custom_time_independent_ = true;
};

} // namespace nf
