#include "emh/normal_form.hpp"

#include "emh/error.hpp"

#include <sstream>

namespace emh {

namespace {

class Terms {
public:
    Terms() { os_.precision(17); }

    void add(double c, const char* monomial)
    {
        if (c == 0.0) return;
        if (!first_) os_ << " + ";
        os_ << "(" << c << ")";
        if (*monomial) os_ << "*" << monomial;
        first_ = false;
    }
    std::string str() const { return first_ ? std::string("0") : os_.str(); }

private:
    std::ostringstream os_;
    bool first_ = true;
};

} // namespace

std::pair<Surface, Surface> normal_form_surfaces(const NormalFormCoefficients& c, double half_width)
{
    if (c.dim != 1 && c.dim != 2) throw Error(ErrorKind::config, "normal form dimension must be 1 or 2");
    if (!c.valid()) throw Error(ErrorKind::config, "normal form needs epsilon = +-1 and epsilon * p < 0");
    const double e = c.epsilon, p = c.p;
    const double q = 0.5 * (p * p + e);

    Terms t1, t2;
    t1.add(1.0, "");
    t1.add(e * p, "u");
    t1.add(-q, "u^2");
    t1.add(c.a0, "u^3");
    t2.add(-1.0, "");
    t2.add(-e * p, "u");
    t2.add(c.delta * q, "u^2");
    t2.add(c.b0, "u^3");
    if (c.dim == 2) {
        t1.add(c.a, "v^2");
        t1.add(c.a1, "u^2*v");
        t1.add(c.a2, "u*v^2");
        t1.add(c.a3, "v^3");
        t2.add(c.b, "v^2");
        t2.add(c.b1, "u^2*v");
        t2.add(c.b2, "u*v^2");
        t2.add(c.b3, "v^3");
    }
    const std::vector<std::string> vars = c.dim == 2 ? std::vector<std::string>{"u", "v"} : std::vector<std::string>{"u"};
    const std::vector<Interval> box(c.dim, Interval{-half_width, half_width});
    return {Surface::graph(Expression::parse(t1.str(), vars), box),
            Surface::graph(Expression::parse(t2.str(), vars), box)};
}

} // namespace emh
