#include "doctest.h"

#include "gradcheck.hpp"

using tonelut::testing::run_gradient_suite;

TEST_CASE("every differentiable stage matches central differences") {
    for (const auto& check : run_gradient_suite(20240611, 20)) {
        CAPTURE(check.op);
        CHECK(check.instances == 20);
        CHECK(check.worst < 1e-4);
    }
}
