#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "mantra/derivation.h"
#include "mantra/errors.h"
#include "mantra/latent_space.h"

using namespace mantra;

namespace {

Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

double relative_frobenius(const Matrix& approx, const Matrix& exact) {
  return (approx - exact).norm() / exact.norm();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mantra_latent_" + name);
}

}  // namespace

TEST_CASE("synthetic decoder closed forms") {
  SyntheticDecoder dec = SyntheticDecoder::random(6, 9, 11);
  Vector zero = Vector::Zero(6);
  CHECK(dec.evaluate(zero).isZero(0.0));
  CHECK((dec.jacobian(zero) - dec.a() * dec.b()).norm() == 0.0);
  Vector big = Vector::Constant(6, 1e3);
  // Bz may land near zero for some rows; scale until every row saturates.
  Vector bz = dec.b() * big;
  REQUIRE(bz.array().abs().minCoeff() > 20.0);
  CHECK(dec.jacobian(big).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(dec.evaluate(big) == dec.evaluate(big));
  CHECK_THROWS_AS(dec.evaluate(Vector::Zero(5)), std::invalid_argument);
}

TEST_CASE("finite-difference Jacobian matches the synthetic decoder") {
  SyntheticDecoder dec = SyntheticDecoder::random(kDefaultLatentDim, 40, 5);
  std::mt19937_64 rng(17);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Vector z = random_vector(rng, kDefaultLatentDim);
    double err = relative_frobenius(jacobian_fd(dec, z), dec.jacobian(z));
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("finite differences recover a linear map") {
  std::mt19937_64 rng(23);
  Matrix m(7, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::normal_distribution<double>(0, 1)(rng);
  LinearMap lin(m);
  for (int trial = 0; trial < 20; ++trial) {
    Vector z = random_vector(rng, 4, 3.0);
    CHECK((jacobian_fd(lin, z) - m).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(jacobian_fd(lin, Vector::Zero(4), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(jacobian_fd(lin, Vector::Zero(4), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(jacobian_fd(lin, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("jacobian_term") {
  std::mt19937_64 rng(29);
  IdentityMap id(5);
  Matrix m(3, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::normal_distribution<double>(0, 1)(rng);
  LinearMap lin(m);
  SyntheticDecoder syn = SyntheticDecoder::random(5, 12, 3);
  for (int trial = 0; trial < 50; ++trial) {
    Vector a = random_vector(rng, 5);
    Vector b = random_vector(rng, 5);
    CHECK(jacobian_term(id, a, a).value == 0.0);
    CHECK(jacobian_term(id, a, b).value == doctest::Approx((b - a).norm()).epsilon(1e-9));
    CHECK(jacobian_term(lin, a, b).value == doctest::Approx((m * (b - a)).norm()).epsilon(1e-9));
    for (const LatentMap* map : {static_cast<const LatentMap*>(&id), static_cast<const LatentMap*>(&lin),
                                 static_cast<const LatentMap*>(&syn)}) {
      double ab = jacobian_term(*map, a, b).value;
      CHECK(ab == jacobian_term(*map, b, a).value);
      CHECK(ab >= 0.0);
    }
  }
  CHECK_THROWS_AS(jacobian_term(id, Vector::Zero(5), Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("grammar-logit decoder") {
  const Grammar& g = default_grammar();
  DecoderWeights w = random_decoder_weights(g, 8, 30, 6, 41);
  GrammarLogitDecoder dec(w);
  CHECK(dec.t_max() == 30);
  CHECK(dec.width() == g.rule_width());
  LogitMatrix l = dec.decode_logits(Vector::Zero(8));
  CHECK(l.rows() == 30);
  CHECK(l.cols() == g.rule_width());

  std::mt19937_64 rng(43);
  int complete = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Vector z = random_vector(rng, 8);
    DecoderOutput a = dec.decode(z, g);
    DecoderOutput b = dec.decode(z, g);
    CHECK(a.logits == b.logits);
    CHECK(a.text == b.text);
    Vector near = z;
    near(0) += 1e-13;
    CHECK(dec.decode(near, g).text == a.text);
    if (a.complete) {
      ++complete;
      CHECK(derive(parse(a.text, g), g).text == a.text);
    } else {
      CHECK_FALSE(a.valid);
    }
  }
  CHECK(complete > 0);

  // Structured product agrees with the generic full Jacobian.
  for (int trial = 0; trial < 10; ++trial) {
    Vector z = random_vector(rng, 8);
    Vector delta = random_vector(rng, 8);
    Vector fast = dec.jacobian_fd_apply(z, delta);
    Vector slow = dec.LatentMap::jacobian_fd_apply(z, delta);
    CHECK((fast - slow).norm() <= 1e-9 * (1.0 + slow.norm()));
    CHECK(jacobian_term(dec, z, delta).value == jacobian_term(dec, delta, z).value);
  }
  // Batch evaluation matches column-wise evaluation.
  Matrix pts(8, 3);
  for (int c = 0; c < 3; ++c) pts.col(c) = random_vector(rng, 8);
  Matrix batch = dec.evaluate_batch(pts);
  for (int c = 0; c < 3; ++c) CHECK((batch.col(c) - dec.evaluate(pts.col(c))).norm() < 1e-12);
}

TEST_CASE("fit_rule_prior") {
  const Grammar& g = default_grammar();
  std::vector<RuleSequence> corpus{parse("CC", g), parse("CCO", g), parse("c1ccccc1", g)};
  DecoderWeights base = random_decoder_weights(g, 6, 20, 4, 2);
  DecoderWeights flat = base, ramped = base;
  fit_rule_prior(flat, g, corpus, 1.0, 0.0);
  fit_rule_prior(ramped, g, corpus);
  CHECK(flat.w1 == base.w1);
  CHECK(flat.w2 == base.w2);
  CHECK(flat.b1 == base.b1);

  std::vector<double> counts(g.production_count(), 0.0);
  for (const auto& seq : corpus)
    for (std::size_t id : seq.rule_ids) counts[id] += 1.0;
  const std::size_t w = flat.n_prod;
  for (std::size_t t = 0; t < flat.t_max; ++t) {
    CHECK(flat.b2[t * w + g.pad_rule()] == -10.0f);
    for (std::uint32_t nt = 0; nt < g.nonterminals().size(); ++nt) {
      auto alts = g.alternatives(nt);
      double total = 0.0, mass = 0.0;
      for (std::size_t p : alts) total += counts[p] + 1.0;
      for (std::size_t p : alts) {
        double expect = std::log((counts[p] + 1.0) / total);
        CHECK(std::abs(flat.b2[t * w + p] - expect) < 1e-6);
        mass += std::exp(static_cast<double>(flat.b2[t * w + p]));
      }
      CHECK(std::abs(mass - 1.0) < 1e-5);
    }
    // the ramp only touches epsilon alternatives and grows with the step
    for (std::size_t p = 0; p < g.production_count(); ++p) {
      double lift = ramped.b2[t * w + p] - flat.b2[t * w + p];
      if (!g.productions()[p].is_epsilon()) {
        CHECK(lift == 0.0);
      } else if (t > 0) {
        double before = ramped.b2[(t - 1) * w + p] - flat.b2[(t - 1) * w + p];
        CHECK(lift > before);
      }
    }
  }
  CHECK_THROWS_AS(fit_rule_prior(flat, g, corpus, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fit_rule_prior(flat, g, corpus, 1.0, -1.0), std::invalid_argument);
  DecoderWeights narrow = base;
  narrow.n_prod -= 1;
  CHECK_THROWS_AS(fit_rule_prior(narrow, g, corpus), std::invalid_argument);
}

TEST_CASE("reshaped synthetic decoder") {
  const Grammar& g = default_grammar();
  SyntheticDecoder syn = SyntheticDecoder::random(4, 5 * g.rule_width(), 2);
  ReshapedDecoder dec(syn, 5, g.rule_width());
  CHECK(dec.decode_logits(Vector::Zero(4)) == LogitMatrix(5, g.rule_width()));
  CHECK_NOTHROW(dec.decode(Vector::Ones(4), g));
  CHECK_THROWS_AS(ReshapedDecoder(syn, 4, g.rule_width()), std::invalid_argument);
  GrammarLogitDecoder other(random_decoder_weights(g, 4, 3, 2, 1));
  SyntheticDecoder narrow = SyntheticDecoder::random(4, 6, 2);
  ReshapedDecoder wrong(narrow, 3, 2);
  CHECK_THROWS_AS(wrong.decode(Vector::Zero(4), g), std::invalid_argument);
}

TEST_CASE("decoder weight files") {
  const Grammar& g = default_grammar();
  DecoderWeights w = random_decoder_weights(g, 5, 7, 3, 9);
  auto path = temp_file("weights.decw");
  save_decoder_weights(w, path);
  DecoderWeights back = load_decoder_weights(path);
  CHECK(back == w);
  CHECK(std::filesystem::file_size(path) == 8 + 4 * 8 + 4 * (w.w1.size() + w.b1.size() + w.w2.size() + w.b2.size()));
  CHECK(random_decoder_weights(g, 5, 7, 3, 9) == w);
  CHECK_FALSE(random_decoder_weights(g, 5, 7, 3, 10) == w);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  CHECK_THROWS_AS(load_decoder_weights(path), FormatError);

  save_decoder_weights(w, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  CHECK_THROWS_AS(load_decoder_weights(path), FormatError);
  std::filesystem::remove(path);
  CHECK_THROWS(load_decoder_weights(path));
}

TEST_CASE("projection encoder") {
  ProjectionEncoder enc(kDefaultLatentDim, 2048, 7);
  MolGraph a = to_molgraph("CCO", default_grammar());
  CHECK(enc.encode(a) == enc.encode(a));
  CHECK(enc.encode(a) == ProjectionEncoder(kDefaultLatentDim, 2048, 7).encode(a));
  CHECK_FALSE(enc.encode(a) == ProjectionEncoder(kDefaultLatentDim, 2048, 8).encode(a));
  CHECK(enc.encode(a).size() == static_cast<Eigen::Index>(kDefaultLatentDim));

  // Independent oracle: regenerate R entry by entry with the same generator order.
  Fingerprint fp = fingerprint(a);
  std::mt19937_64 rng(7);
  Vector expect = Vector::Zero(kDefaultLatentDim);
  for (std::size_t c = 0; c < 2048; ++c) {
    for (std::size_t r = 0; r < kDefaultLatentDim; ++r) {
      double s = (rng() >> 63) ? 1.0 : -1.0;
      if (fp.test(c)) expect(r) += s;
    }
  }
  expect /= std::sqrt(2048.0);
  CHECK((enc.encode(fp) - expect).norm() == 0.0);

  // Each coordinate is a sum of popcount(fp) signs over sqrt(nbits).
  for (const char* s : {"C", "CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "NS(=O)(=O)c1ccc(Cl)cc1"}) {
    Fingerprint f = fingerprint(to_molgraph(s, default_grammar()));
    Vector z = enc.encode(f);
    double bound = std::sqrt(static_cast<double>(kDefaultLatentDim)) * f.popcount() / std::sqrt(2048.0);
    CHECK(z.allFinite());
    CHECK(z.norm() <= bound + 1e-12);
    CHECK(z.cwiseAbs().maxCoeff() <= f.popcount() / std::sqrt(2048.0) + 1e-12);
  }
  CHECK_THROWS_AS(enc.encode(Fingerprint(64)), std::invalid_argument);
}
