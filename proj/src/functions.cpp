#include "nf/functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nf/error.hpp"

namespace nf {

using std::numbers::pi;

// ---------------------------------------------------------------- Profile

Profile Profile::zero() { return {}; }

Profile Profile::constant(double value)
{
    Profile p;
    p.kind_ = Kind::constant;
    p.a_ = value;
    return p;
}

Profile Profile::linear(double offset, double slope)
{
    Profile p;
    p.kind_ = Kind::linear;
    p.a_ = offset;
    p.b_ = slope;
    return p;
}

Profile Profile::sine(double amplitude, double mode, double offset)
{
    Profile p;
    p.kind_ = Kind::sine;
    p.a_ = amplitude;
    p.b_ = mode;
    p.c_ = offset;
    return p;
}

Profile Profile::cosine(double amplitude, double mode, double offset)
{
    Profile p = sine(amplitude, mode, offset);
    p.kind_ = Kind::cosine;
    return p;
}

Profile Profile::bump(double amplitude, double center, double width, double offset)
{
    if (!(width > 0.0))
        throw invalid_argument("bump width must be positive");
    Profile p;
    p.kind_ = Kind::bump;
    p.a_ = amplitude;
    p.b_ = center;
    p.c_ = width;
    p.d_ = offset;
    return p;
}

Profile Profile::custom(std::function<double(PointRef)> fn, double sup, double lipschitz)
{
    if (!fn)
        throw invalid_argument("custom profile needs an evaluator");
    Profile p;
    p.kind_ = Kind::custom;
    p.a_ = sup;
    p.b_ = lipschitz;
    p.custom_ = std::move(fn);
    return p;
}

double Profile::operator()(PointRef x) const
{
    switch (kind_) {
    case Kind::zero:
        return 0.0;
    case Kind::constant:
        return a_;
    case Kind::linear:
        return a_ + b_ * x[0];
    case Kind::sine:
        return c_ + a_ * std::sin(b_ * pi * x[0]);
    case Kind::cosine:
        return c_ + a_ * std::cos(b_ * pi * x[0]);
    case Kind::bump:
        return d_ + a_ * std::exp(-(x.array() - b_).square().sum() / (2.0 * c_ * c_));
    case Kind::custom:
        return custom_(x);
    }
    return 0.0;
}

double Profile::sup_bound() const
{
    switch (kind_) {
    case Kind::zero:
        return 0.0;
    case Kind::constant:
        return std::abs(a_);
    case Kind::linear:
        return std::abs(a_) + std::abs(b_);
    case Kind::sine:
    case Kind::cosine:
        return std::abs(c_) + std::abs(a_);
    case Kind::bump:
        return std::abs(d_) + std::abs(a_);
    case Kind::custom:
        return a_;
    }
    return 0.0;
}

double Profile::gradient_bound() const
{
    switch (kind_) {
    case Kind::zero:
    case Kind::constant:
        return 0.0;
    case Kind::linear:
        return std::abs(b_);
    case Kind::sine:
    case Kind::cosine:
        return std::abs(a_ * b_) * pi;
    case Kind::bump:
        // max of |r| exp(-r^2 / 2w^2) / w^2 is at r = w
        return std::abs(a_) / (c_ * std::sqrt(std::exp(1.0)));
    case Kind::custom:
        return b_;
    }
    return 0.0;
}

// ---------------------------------------------------------------- GainFunction

GainFunction GainFunction::logistic(double beta1, double beta2)
{
    GainFunction g;
    g.kind_ = Kind::logistic;
    g.p1_ = beta1;
    g.p2_ = beta2;
    g.sup_ = 1.0;
    g.lipschitz_ = std::abs(beta1) / 4.0;
    return g;
}

GainFunction GainFunction::tanh(double beta1, double beta2)
{
    GainFunction g;
    g.kind_ = Kind::tanh;
    g.p1_ = beta1;
    g.p2_ = beta2;
    g.sup_ = 1.0;
    g.lipschitz_ = std::abs(beta1) / 2.0;
    return g;
}

GainFunction GainFunction::constant(double value)
{
    if (!(value >= 0.0) || !std::isfinite(value))
        throw invalid_argument("constant gain must be finite and non-negative");
    GainFunction g;
    g.kind_ = Kind::constant;
    g.p2_ = value;
    g.sup_ = value;
    g.lipschitz_ = 0.0;
    return g;
}

GainFunction GainFunction::affine(double a, double b, double upper)
{
    if (!(upper > 0.0) || !std::isfinite(upper) || !std::isfinite(a) || !std::isfinite(b))
        throw invalid_argument("affine gain needs finite slope, intercept and positive upper clamp");
    GainFunction g;
    g.kind_ = Kind::affine;
    g.p1_ = a;
    g.p2_ = b;
    g.p3_ = upper;
    g.sup_ = upper;
    g.lipschitz_ = std::abs(a);
    return g;
}

GainFunction GainFunction::table(std::vector<double> xs, std::vector<double> ys, double declared_sup,
                                 double declared_lipschitz)
{
    if (xs.size() < 2 || xs.size() != ys.size())
        throw invalid_argument("gain table needs at least two (x, y) pairs of equal length");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw invalid_argument("gain table abscissae must be strictly increasing");
    GainFunction g;
    g.kind_ = Kind::table;
    g.xs_ = std::move(xs);
    g.ys_ = std::move(ys);
    g.sup_ = declared_sup;
    g.lipschitz_ = declared_lipschitz;

    // Dense sampling over the table range plus a margin on each side.
    const double lo = g.xs_.front() - 1.0;
    const double hi = g.xs_.back() + 1.0;
    const int samples = 20000;
    const double h = (hi - lo) / samples;
    double prev = g(lo);
    for (int i = 0; i <= samples; ++i) {
        const double z = lo + h * i;
        const double v = g(z);
        if (v < 0.0)
            throw invalid_argument("gain table takes negative value " + std::to_string(v));
        if (v > declared_sup * (1.0 + 1e-12) + 1e-15)
            throw invalid_argument("gain table exceeds declared sup " + std::to_string(declared_sup));
        if (i > 0 && std::abs(v - prev) > declared_lipschitz * h * (1.0 + 1e-9) + 1e-15)
            throw invalid_argument("gain table violates declared Lipschitz constant " +
                                   std::to_string(declared_lipschitz));
        prev = v;
    }
    for (std::size_t i = 1; i < g.xs_.size(); ++i) {
        const double slope = std::abs(g.ys_[i] - g.ys_[i - 1]) / (g.xs_[i] - g.xs_[i - 1]);
        if (slope > declared_lipschitz * (1.0 + 1e-9))
            throw invalid_argument("gain table violates declared Lipschitz constant " +
                                   std::to_string(declared_lipschitz));
    }
    return g;
}

double GainFunction::operator()(double z) const
{
    switch (kind_) {
    case Kind::logistic:
        return 1.0 / (1.0 + std::exp(-(p1_ * z + p2_)));
    case Kind::tanh:
        return 0.5 * (std::tanh(p1_ * z + p2_) + 1.0);
    case Kind::constant:
        return p2_;
    case Kind::affine:
        return std::clamp(p1_ * z + p2_, 0.0, p3_);
    case Kind::table: {
        if (z <= xs_.front())
            return ys_.front();
        if (z >= xs_.back())
            return ys_.back();
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), z);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
        const double s = (z - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
        return ys_[i - 1] + s * (ys_[i] - ys_[i - 1]);
    }
    }
    return 0.0;
}

double GainFunction::derivative(double z) const
{
    switch (kind_) {
    case Kind::logistic: {
        const double f = (*this)(z);
        return p1_ * f * (1.0 - f);
    }
    case Kind::tanh: {
        const double t = std::tanh(p1_ * z + p2_);
        return 0.5 * p1_ * (1.0 - t * t);
    }
    case Kind::constant:
        return 0.0;
    case Kind::affine: {
        const double v = p1_ * z + p2_;
        return (v > 0.0 && v < p3_) ? p1_ : 0.0;
    }
    case Kind::table: {
        if (z <= xs_.front() || z >= xs_.back())
            return 0.0;
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), z);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
        return (ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]);
    }
    }
    return 0.0;
}

double GainFunction::affine_slope() const
{
    if (!is_affine())
        throw Error(ErrorKind::unsupported, "gain is not affine");
    return kind_ == Kind::affine ? p1_ : 0.0;
}

double GainFunction::affine_intercept() const
{
    if (!is_affine())
        throw Error(ErrorKind::unsupported, "gain is not affine");
    return p2_;
}

std::string GainFunction::describe() const
{
    std::ostringstream os;
    switch (kind_) {
    case Kind::logistic:
        os << "logistic(beta1=" << p1_ << ", beta2=" << p2_ << ")";
        break;
    case Kind::tanh:
        os << "tanh(beta1=" << p1_ << ", beta2=" << p2_ << ")";
        break;
    case Kind::constant:
        os << "constant(" << p2_ << ")";
        break;
    case Kind::affine:
        os << "affine(a=" << p1_ << ", b=" << p2_ << ", upper=" << p3_ << ")";
        break;
    case Kind::table:
        os << "table(" << xs_.size() << " points)";
        break;
    }
    return os.str();
}

// ---------------------------------------------------------------- Kernel

Kernel Kernel::zero() { return {}; }

Kernel Kernel::constant(double value)
{
    Kernel k;
    k.kind_ = Kind::constant;
    k.a_ = value;
    return k;
}

Kernel Kernel::gaussian(double amplitude, double sigma)
{
    if (!(sigma > 0.0))
        throw invalid_argument("gaussian kernel width must be positive");
    Kernel k;
    k.kind_ = Kind::gaussian;
    k.a_ = amplitude;
    k.b_ = sigma;
    return k;
}

Kernel Kernel::mexican_hat(double a_exc, double s_exc, double a_inh, double s_inh)
{
    if (!(s_exc > 0.0) || !(s_inh > 0.0))
        throw invalid_argument("mexican-hat kernel widths must be positive");
    Kernel k;
    k.kind_ = Kind::mexican_hat;
    k.a_ = a_exc;
    k.b_ = s_exc;
    k.c_ = a_inh;
    k.d_ = s_inh;
    return k;
}

Kernel Kernel::linear_sum(double c0, double c1)
{
    Kernel k;
    k.kind_ = Kind::linear_sum;
    k.a_ = c0;
    k.b_ = c1;
    return k;
}

Kernel Kernel::custom(std::function<double(PointRef, PointRef)> fn)
{
    if (!fn)
        throw invalid_argument("custom kernel needs an evaluator");
    Kernel k;
    k.kind_ = Kind::custom;
    k.custom_ = std::move(fn);
    return k;
}

double Kernel::operator()(PointRef x, PointRef y) const
{
    switch (kind_) {
    case Kind::zero:
        return 0.0;
    case Kind::constant:
        return a_;
    case Kind::gaussian:
        return a_ * std::exp(-(x - y).squaredNorm() / (2.0 * b_ * b_));
    case Kind::mexican_hat: {
        const double r2 = (x - y).squaredNorm();
        return a_ * std::exp(-r2 / (2.0 * b_ * b_)) - c_ * std::exp(-r2 / (2.0 * d_ * d_));
    }
    case Kind::linear_sum:
        return a_ + b_ * (x.sum() + y.sum());
    case Kind::custom:
        return custom_(x, y);
    }
    return 0.0;
}

// ---------------------------------------------------------------- Input

double Modulation::operator()(double t) const
{
    return kind == Kind::sinusoid ? 1.0 + amplitude * std::sin(omega * t) : 1.0;
}

double Modulation::sup_abs() const { return kind == Kind::sinusoid ? 1.0 + std::abs(amplitude) : 1.0; }

InputCurrent::InputCurrent(Profile profile, Modulation modulation)
    : profile_(std::move(profile)), modulation_(modulation), bound_(profile_.sup_bound() * modulation_.sup_abs())
{
}

InputCurrent InputCurrent::custom(std::function<double(double, PointRef)> fn, double bound, bool time_independent)
{
    if (!fn)
        throw invalid_argument("custom input needs an evaluator");
    InputCurrent in;
    in.custom_ = std::move(fn);
    in.bound_ = bound;
    in.custom_time_independent_ = time_independent;
    return in;
}

double InputCurrent::operator()(double t, PointRef x) const
{
    if (custom_)
        return custom_(t, x);
    if (profile_.is_zero())
        return 0.0;
    return profile_(x) * modulation_(t);
}

bool InputCurrent::time_independent() const
{
    if (custom_)
        return custom_time_independent_;
    return profile_.is_zero() || modulation_.kind == Modulation::Kind::none;
}

} // namespace nf
