#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lvnf/contraction.hpp"
#include "lvnf/rng.hpp"

using namespace lvnf;

TEST_CASE("identity inside the unit cube") {
  Vec3 x(0.3, -0.2, 0.1);
  CHECK(contract(x) == x);
  CHECK(contract_jacobian(x) == Mat3::Identity());
}

TEST_CASE("direct evaluation outside the cube") {
  Vec3 a = contract(Vec3(3, 0, 0));
  CHECK(a.x() == doctest::Approx(1.0 + 2.0 / 3.0).epsilon(1e-9));
  CHECK(a.y() == 0.0);
  CHECK(a.z() == 0.0);

  Vec3 b = contract(Vec3(0, -5, 0));
  CHECK(b.y() == doctest::Approx(-1.8).epsilon(1e-12));
}

TEST_CASE("non-finite input is rejected") {
  CHECK_THROWS_AS(contract(Vec3(std::nan(""), 0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(contract(Vec3(0, std::numeric_limits<double>::infinity(), 0)),
                  std::invalid_argument);
}

TEST_CASE("output stays inside the open cube of half-width 2") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    Vec3 x = rng.uniform_vec3(-500.0, 500.0);
    Vec3 c = contract(x);
    CHECK(c.cwiseAbs().maxCoeff() < 2.0);
  }
}

TEST_CASE("continuity across the unit shell") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    Vec3 dir = rng.unit_vec3();
    Vec3 inside = dir * (1.0 - 1e-9);
    Vec3 outside = dir * (1.0 + 1e-9);
    CHECK((contract(inside) - contract(outside)).norm() < 1e-7);
  }
}

TEST_CASE("injectivity on random pairs") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    Vec3 a = rng.uniform_vec3(-50.0, 50.0);
    Vec3 b = rng.uniform_vec3(-50.0, 50.0);
    if ((a - b).norm() < 1e-6) continue;
    CHECK((contract(a) - contract(b)).norm() > 0.0);
  }
}

TEST_CASE("jacobian matches finite differences away from kinks") {
  Rng rng(13);
  for (auto type : {ContractionType::InfNorm, ContractionType::L2}) {
    int checked = 0;
    while (checked < 200) {
      Vec3 x = rng.uniform_vec3(-3.0, 3.0);
      if (type == ContractionType::InfNorm) {
        // Stay away from the unit shell and argmax ties where the map kinks.
        double m = x.cwiseAbs().maxCoeff();
        if (std::abs(m - 1.0) < 1e-2) continue;
        Vec3 s = x.cwiseAbs();
        std::sort(s.data(), s.data() + 3);
        if (m > 1.0 && s[2] - s[1] < 1e-2) continue;
      } else {
        if (std::abs(x.norm() - 1.0) < 1e-2) continue;
      }
      Mat3 J = contract_jacobian(x, type);
      const double h = 1e-6;
      for (int k = 0; k < 3; ++k) {
        Vec3 dx = Vec3::Zero();
        dx[k] = h;
        Vec3 fd = (contract(x + dx, type) - contract(x - dx, type)) / (2.0 * h);
        for (int r = 0; r < 3; ++r) CHECK(J(r, k) == doctest::Approx(fd[r]).epsilon(1e-5));
      }
      ++checked;
    }
  }
}

TEST_CASE("l2 variant contracts by vector norm") {
  Vec3 x(3, 4, 0);  // norm 5
  Vec3 c = contract(x, ContractionType::L2);
  CHECK(c.norm() == doctest::Approx(1.8).epsilon(1e-12));
  CHECK((c.normalized() - x.normalized()).norm() < 1e-12);
}
