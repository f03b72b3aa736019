#include <doctest.h>

#include <cmath>
#include <vector>

#include "shield/schedule.hpp"

using namespace shield;

TEST_CASE("epsilon_init covers the terminal violation plus margin") {
    CHECK(epsilon_init(-15.9, 0.1) == 16.0);
    CHECK(epsilon_init(2.0, 0.1) == 0.1); // safe draw: margin only
    CHECK(epsilon_init(0.0, 0.0) == 0.0);
    CHECK(epsilon_init(-0.5, 0.25) == 0.75);
}

namespace {

std::vector<ConstrictionSchedule> all_kinds() {
    return {ConstrictionSchedule::linear(),
            ConstrictionSchedule::exponential(2.0),
            ConstrictionSchedule::exponential(14.0),
            ConstrictionSchedule::polynomial(1.0),
            ConstrictionSchedule::polynomial(2.0),
            ConstrictionSchedule::polynomial(3.5)};
}

} // namespace

TEST_CASE("schedule endpoints are bit-exact") {
    for (const auto& sched : all_kinds()) {
        // 3.0 and 0.7 are adversarial for the exponential form: eps0*x/x
        // rounds away from eps0 unless the ratio is taken first
        for (double eps0 : {0.0, 0.3, 0.7, 3.0, 16.0, 123.456, 1e6, 6.323e-4}) {
            for (double T : {1.0, 10.0, 0.25, 1.5}) {
                CHECK(sched.eval(eps0, 0.0, T) == 0.0);
                CHECK(sched.eval(eps0, T, T) == eps0);
            }
        }
    }
}

TEST_CASE("schedule closed-form spot values") {
    auto lin = ConstrictionSchedule::linear();
    CHECK(lin.eval(1.6, 0.25, 1.0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(lin.deriv(1.6, 0.25, 1.0) == doctest::Approx(1.6).epsilon(1e-15));

    auto poly = ConstrictionSchedule::polynomial(2.0);
    CHECK(poly.eval(16.0, 0.5, 1.0) == 4.0); // 16 * 0.5^2
    CHECK(poly.eval(16.0, 0.25, 1.0) == 1.0);

    // independent closed form: expm1(l/2)/expm1(l) = 1/(exp(l/2)+1)
    auto expo = ConstrictionSchedule::exponential(2.0);
    CHECK(expo.eval(3.0, 0.5, 1.0) ==
          doctest::Approx(3.0 / (std::exp(1.0) + 1.0)).epsilon(1e-14));
}

TEST_CASE("schedules are monotone with nonnegative derivative") {
    for (const auto& sched : all_kinds()) {
        const double eps0 = 2.5, T = 3.0;
        double prev = -1.0;
        for (int i = 0; i <= 400; ++i) {
            double t = T * i / 400;
            double v = sched.eval(eps0, t, T);
            CHECK(v >= prev);
            CHECK(v >= 0.0);
            CHECK(v <= eps0);
            CHECK(sched.deriv(eps0, t, T) >= 0.0);
            prev = v;
        }
    }
}

TEST_CASE("schedule derivative matches finite differences") {
    for (const auto& sched : all_kinds()) {
        const double eps0 = 1.7, T = 2.0, step = 1e-6 * T;
        for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            double t = s * T;
            double fd = (sched.eval(eps0, t + step, T) - sched.eval(eps0, t - step, T)) / (2 * step);
            double an = sched.deriv(eps0, t, T);
            CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
        }
    }
}

TEST_CASE("schedule rejects times outside [0, T]") {
    auto sched = ConstrictionSchedule::exponential(2.0);
    CHECK_THROWS_AS(sched.eval(1.0, -1e-9, 1.0), TimeOutOfRange);
    CHECK_THROWS_AS(sched.eval(1.0, 1.0 + 1e-9, 1.0), TimeOutOfRange);
    CHECK_THROWS_AS(sched.deriv(1.0, -0.5, 1.0), TimeOutOfRange);
    CHECK_THROWS_AS(sched.deriv(1.0, 2.0, 1.0), TimeOutOfRange);
}

TEST_CASE("schedule shape parameters are validated") {
    CHECK_THROWS_AS(ConstrictionSchedule::exponential(0.0), ValidationError);
    CHECK_THROWS_AS(ConstrictionSchedule::exponential(-1.0), ValidationError);
    CHECK_THROWS_AS(ConstrictionSchedule::polynomial(0.5), ValidationError);
    CHECK_NOTHROW(ConstrictionSchedule::polynomial(1.0));
}

TEST_CASE("schedule kind metadata round-trips") {
    CHECK(ConstrictionSchedule::linear().name() == "linear");
    CHECK(ConstrictionSchedule::exponential(3.0).name() == "exponential");
    CHECK(ConstrictionSchedule::exponential(3.0).param() == 3.0);
    CHECK(ConstrictionSchedule::polynomial(2.5).name() == "polynomial");
    CHECK(ConstrictionSchedule::polynomial(2.5).param() == 2.5);
}
