#include <doctest.h>

#include <json.hpp>

#include "oclab/core.hpp"
#include "oclab/json_io.hpp"

using namespace oclab;

namespace {
Alphabet binary() { return Alphabet({0.0, 1.0}); }
}  // namespace

TEST_CASE("alphabet and pmf validation") {
  CHECK_THROWS(Alphabet({}));
  CHECK_THROWS(Alphabet({1.0, 1.0}));
  CHECK_THROWS(Alphabet({2.0, 1.0}));
  CHECK_THROWS(Pmf(binary(), {0.5, 0.6}));
  CHECK_THROWS(Pmf(binary(), {-0.1, 1.1}));
  CHECK_THROWS(Pmf(binary(), {1.0}));
  Pmf u = Pmf::uniform(binary());
  CHECK(u[0] == 0.5);
}

TEST_CASE("induced_joint basics") {
  Pmf mu(binary(), {0.5, 0.5});
  DeterministicQuantizer identity({0, 1}, 2);
  JointPmf v = induced_joint(identity, mu, binary());
  CHECK(v.at(0, 0) == 0.5);
  CHECK(v.at(1, 1) == 0.5);
  CHECK(v.at(0, 1) == 0.0);

  Pmf mu2(binary(), {0.3, 0.7});
  DeterministicQuantizer constant({0, 0}, 1);
  JointPmf vc = induced_joint(constant, mu2, binary());
  CHECK(vc.at(0, 0) == 0.3);
  CHECK(vc.at(1, 0) == 0.7);
  CHECK(vc.at(0, 1) == 0.0);
  CHECK(vc.at(1, 1) == 0.0);

  Pmf mu3(binary(), {0.25, 0.75});
  DeterministicQuantizer flip({1, 0}, 2);
  JointPmf vf = induced_joint(flip, mu3, binary());
  CHECK(vf.at(0, 1) == 0.25);
  CHECK(vf.at(1, 0) == 0.75);

  // x-marginal reproduces mu entry by entry, exactly.
  Pmf xm = x_marginal(vf);
  for (std::size_t i = 0; i < 2; ++i) CHECK(xm[i] == mu3[i]);

  CHECK_THROWS(induced_joint(DeterministicQuantizer({0, 1, 0}, 2), mu, binary()));
}

TEST_CASE("mixture_joint basics") {
  Pmf mu(binary(), {0.5, 0.5});
  DeterministicQuantizer identity({0, 1}, 2);
  DeterministicQuantizer flip({1, 0}, 2);

  FiniteMixtureQuantizer single({1.0}, {identity});
  JointPmf vs = mixture_joint(single, mu, binary());
  JointPmf vi = induced_joint(identity, mu, binary());
  for (std::size_t k = 0; k < 4; ++k) CHECK(vs.mass()[k] == vi.mass()[k]);

  // Hand expansion of 0.5*identity + 0.5*flip on uniform input: all cells 1/4.
  FiniteMixtureQuantizer mix({0.5, 0.5}, {identity, flip});
  JointPmf vm = mixture_joint(mix, mu, binary());
  for (std::size_t k = 0; k < 4; ++k) CHECK(vm.mass()[k] == doctest::Approx(0.25).epsilon(1e-15));

  // 0.5*const0 + 0.5*const1 gives the product coupling.
  DeterministicQuantizer c0({0, 0}, 2);
  DeterministicQuantizer c1({1, 1}, 2);
  FiniteMixtureQuantizer prod({0.5, 0.5}, {c0, c1});
  JointPmf vp = mixture_joint(prod, mu, binary());
  for (std::size_t k = 0; k < 4; ++k) CHECK(vp.mass()[k] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("distortion values") {
  Alphabet b = binary();
  DistortionMatrix ham = DistortionMatrix::hamming(b, b);
  DistortionMatrix se = DistortionMatrix::squared_error(b, b);

  JointPmf diag(b, b, {0.5, 0.0, 0.0, 0.5});
  CHECK(distortion(diag, ham) == 0.0);

  JointPmf prod(b, b, {0.25, 0.25, 0.25, 0.25});
  CHECK(distortion(prod, ham) == 0.5);

  JointPmf anti(b, b, {0.0, 0.25, 0.75, 0.0});
  CHECK(distortion(anti, se) == 1.0);

  CHECK_THROWS(distortion(diag, DistortionMatrix(1, 2, {0.0, 1.0})));
}

TEST_CASE("marginals") {
  Alphabet b = binary();
  JointPmf diag(b, b, {0.5, 0.0, 0.0, 0.5});
  Pmf ym = output_marginal(diag);
  CHECK(ym[0] == 0.5);
  CHECK(ym[1] == 0.5);

  JointPmf prod(b, b, {0.2 * 0.3, 0.2 * 0.7, 0.8 * 0.3, 0.8 * 0.7});
  Pmf ym2 = output_marginal(prod);
  CHECK(ym2[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(ym2[1] == doctest::Approx(0.7).epsilon(1e-15));

  // Mixture of constants puts the weights on the constants' outputs.
  Pmf mu(b, {0.5, 0.5});
  FiniteMixtureQuantizer mix({0.3, 0.7},
                             {DeterministicQuantizer({0, 0}, 1), DeterministicQuantizer({1, 1}, 1)});
  Pmf ym3 = output_marginal(mixture_joint(mix, mu, b));
  CHECK(ym3[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(ym3[1] == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("model2 to model3 equals exact enumeration") {
  Alphabet b = binary();
  Alphabet z({-0.5, 0.5});
  Pmf nu(z, {0.5, 0.5});
  // Columns: identity (z0) and flip (z1).
  Model2Quantizer m2(2, {0, 1, 1, 0}, nu, 2);
  FiniteMixtureQuantizer mix = model2_to_model3(m2);
  CHECK(mix.components() == 2);
  CHECK(mix.weights()[0] == 0.5);

  Pmf mu(b, {0.5, 0.5});
  JointPmf vm = mixture_joint(mix, mu, b);
  // Exact enumeration over the product space.
  std::vector<double> tally(4, 0.0);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t zi = 0; zi < 2; ++zi) tally[x * 2 + m2.at(x, zi)] += mu[x] * nu[zi];
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(vm.mass()[k] - tally[k]) <= 1e-15);

  // Single-z quantizer degenerates to one component.
  Model2Quantizer single(2, {0, 1}, Pmf(Alphabet({0.0}), {1.0}), 2);
  CHECK(model2_to_model3(single).components() == 1);
}

TEST_CASE("model1/model2 round trips") {
  Alphabet b = binary();
  Alphabet z({0.0, 1.0});
  Pmf nu(z, {0.25, 0.75});
  Pmf mu(b, {0.4, 0.6});

  Model2Quantizer m2(2, {0, 1, 1, 0}, nu, 2);
  Model1Code m1 = model2_to_model1(m2);
  Model2Quantizer back = model1_to_model2(m1);
  CHECK(back.table() == m2.table());

  JointPmf v0 = mixture_joint(model2_to_model3(m2), mu, b);
  JointPmf v1 = mixture_joint(model2_to_model3(back), mu, b);
  for (std::size_t k = 0; k < 4; ++k) CHECK(v0.mass()[k] == v1.mass()[k]);

  // M=1 constant code collapses to a constant table.
  Model1Code c1(2, {0, 0, 0, 0}, 1, {1, 1}, nu);
  Model2Quantizer ct = model1_to_model2(c1);
  CHECK(ct.table() == std::vector<std::size_t>({1, 1, 1, 1}));

  // A decoder row never indexed by the encoder does not affect the joint.
  Model1Code unused(2, {0, 0, 0, 0}, 2, {1, 1, 0, 0}, nu);
  Model2Quantizer ut = model1_to_model2(unused);
  CHECK(ut.table() == std::vector<std::size_t>({1, 1, 1, 1}));

  CHECK_THROWS(Model1Code(2, {2, 0, 0, 0}, 2, {0, 0, 1, 1}, nu));
}

TEST_CASE("mixture distortion is linear in the weights") {
  Alphabet b = binary();
  Pmf mu(b, {0.3, 0.7});
  DistortionMatrix ham = DistortionMatrix::hamming(b, b);
  FiniteMixtureQuantizer mix({0.2, 0.5, 0.3},
                             {DeterministicQuantizer({0, 1}, 2), DeterministicQuantizer({1, 0}, 2),
                              DeterministicQuantizer({1, 1}, 2)});
  double lhs = distortion(mixture_joint(mix, mu, b), ham);
  double rhs = 0.0;
  for (std::size_t k = 0; k < 3; ++k)
    rhs += mix.weights()[k] * distortion(induced_joint(mix.quantizers()[k], mu, b), ham);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
}

TEST_CASE("dither demo") {
  Alphabet z0({0.0});
  Pmf nu0(z0, {1.0});
  // Zero dither: plain uniform quantizer, identity table on the grid.
  DitherDemo plain = dither_demo(4, 1.0, z0, nu0, DitherMode::subtractive);
  CHECK(plain.x_alphabet.points() == std::vector<double>({-1.5, -0.5, 0.5, 1.5}));
  CHECK(plain.y_alphabet.points() == plain.x_alphabet.points());
  for (std::size_t x = 0; x < 4; ++x) CHECK(plain.quantizer.at(x, 0) == x);

  Alphabet zpm({-0.5, 0.5});
  Pmf nupm(zpm, {0.5, 0.5});

  // Subtractive half-step dither on a 2-level grid, by direct evaluation:
  // q_u(x+z)-z lands on 0 or -1 (off the quantizer grid).
  DitherDemo sub = dither_demo(2, 1.0, zpm, nupm, DitherMode::subtractive);
  CHECK(sub.y_alphabet.points() == std::vector<double>({-1.0, 0.0}));
  const Alphabet& ys = sub.y_alphabet;
  CHECK(ys.label(sub.quantizer.at(0, 0)) == 0.0);   // x=-0.5, z=-0.5
  CHECK(ys.label(sub.quantizer.at(0, 1)) == -1.0);  // x=-0.5, z=+0.5
  CHECK(ys.label(sub.quantizer.at(1, 0)) == 0.0);   // x=+0.5, z=-0.5
  CHECK(ys.label(sub.quantizer.at(1, 1)) == 0.0);   // x=+0.5, z=+0.5

  // Nonsubtractive outputs stay on the quantizer grid.
  DitherDemo non = dither_demo(2, 1.0, zpm, nupm, DitherMode::nonsubtractive);
  for (double y : non.y_alphabet.points()) {
    CHECK((y == -0.5 || y == 0.5));
  }

  // Dither large enough to saturate the grid is rejected.
  Alphabet zbig({-3.0, 3.0});
  CHECK_THROWS(dither_demo(2, 1.0, zbig, Pmf(zbig, {0.5, 0.5}), DitherMode::subtractive));
}

TEST_CASE("dither demo feeds the model conversions") {
  Alphabet zpm({-0.5, 0.5});
  Pmf nupm(zpm, {0.5, 0.5});
  DitherDemo demo = dither_demo(2, 1.0, zpm, nupm, DitherMode::subtractive);
  Pmf mu = Pmf::uniform(demo.x_alphabet);

  // Two-component mixture whose joint matches the exact product-space tally.
  FiniteMixtureQuantizer mix = model2_to_model3(demo.quantizer);
  CHECK(mix.components() == 2);
  JointPmf vm = mixture_joint(mix, mu, demo.y_alphabet);
  std::vector<double> tally(vm.mass().size(), 0.0);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t z = 0; z < 2; ++z)
      tally[x * demo.y_alphabet.size() + demo.quantizer.at(x, z)] += mu[x] * nupm[z];
  for (std::size_t k = 0; k < tally.size(); ++k) CHECK(vm.mass()[k] == tally[k]);

  // Model2 -> Model1 -> Model2 keeps the induced joint bit for bit.
  Model2Quantizer back = model1_to_model2(model2_to_model1(demo.quantizer));
  JointPmf vb = mixture_joint(model2_to_model3(back), mu, demo.y_alphabet);
  for (std::size_t k = 0; k < tally.size(); ++k) CHECK(vb.mass()[k] == vm.mass()[k]);
}

TEST_CASE("json round trips") {
  Alphabet b = binary();
  Pmf mu(b, {0.25, 0.75});
  nlohmann::json j = mu;
  CHECK(j["alphabet"] == nlohmann::json({0.0, 1.0}));
  CHECK(j["mass"][1] == 0.75);
  Pmf mu2 = pmf_from_json(j);
  CHECK(mu2.mass() == mu.mass());

  JointPmf v(b, b, {0.5, 0.0, 0.25, 0.25});
  nlohmann::json jv = v;
  JointPmf v2 = joint_pmf_from_json(jv);
  CHECK(v2.mass() == v.mass());

  Model2Quantizer m2(2, {0, 1, 1, 0}, Pmf(Alphabet({0.0, 1.0}), {0.5, 0.5}), 2);
  nlohmann::json jm = m2;
  Model2Quantizer m2b = model2_from_json(jm);
  CHECK(m2b.table() == m2.table());

  FiniteMixtureQuantizer mix({0.5, 0.5},
                             {DeterministicQuantizer({0, 1}, 2), DeterministicQuantizer({1, 0}, 2)});
  nlohmann::json jx = mix;
  FiniteMixtureQuantizer mix2 = mixture_from_json(jx);
  CHECK(mix2.weights() == mix.weights());

  Model1Code m1 = model2_to_model1(m2);
  nlohmann::json j1 = m1;
  Model1Code m1b = model1_from_json(j1);
  CHECK(m1b.encoder() == m1.encoder());
  CHECK(m1b.decoder() == m1.decoder());
}
