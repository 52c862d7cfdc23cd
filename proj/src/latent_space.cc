#include "mantra/latent_space.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "mantra/errors.h"
#include "mantra/stack_decoder.h"

namespace mantra {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw std::domain_error(std::string(what) + " produced a non-finite value");
}

Vector step_sizes(const Vector& z, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("finite-difference step must be positive");
  return step * (1.0 + z.array().abs());
}

// Columns z + h_i e_i for i < d, then z - h_i e_i.
Matrix stencil(const Vector& z, const Vector& h) {
  const Eigen::Index d = z.size();
  Matrix pts = z.replicate(1, 2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    pts(i, i) += h(i);
    pts(i, d + i) -= h(i);
  }
  return pts;
}

Matrix central_columns(const Matrix& values, const Vector& z, const Vector& h) {
  const Eigen::Index d = z.size();
  Matrix j(values.rows(), d);
  for (Eigen::Index i = 0; i < d; ++i) {
    // Divide by the realized step so rounding in z +- h does not bias the quotient.
    double span = (z(i) + h(i)) - (z(i) - h(i));
    j.col(i) = (values.col(i) - values.col(d + i)) / span;
  }
  return j;
}

Matrix map_floats(const std::vector<float>& v, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
  }
  return m;
}

Vector vector_floats(const std::vector<float>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

constexpr char kDecoderMagic[8] = {'D', 'E', 'C', 'W', '0', '0', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw FormatError("truncated decoder weight file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_floats(std::ostream& out, const std::vector<float>& v) {
  for (float f : v) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 4);
  }
}

std::vector<float> read_floats(std::istream& in, std::size_t n) {
  std::vector<float> v(n);
  for (auto& f : v) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) throw FormatError("truncated decoder weight file");
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    f = std::bit_cast<float>(bits);
  }
  return v;
}

double closing_bias(std::size_t t, std::size_t t_max) {
  return 0.5 + 3.0 * static_cast<double>(t) / static_cast<double>(t_max);
}

}  // namespace

void LatentMap::check_dim(const Vector& z) const {
  if (static_cast<std::size_t>(z.size()) != input_dim()) {
    throw std::invalid_argument("latent dimension mismatch: expected " + std::to_string(input_dim()) + ", got " +
                                std::to_string(z.size()));
  }
}

Matrix LatentMap::evaluate_batch(const Matrix& z) const {
  Matrix out(static_cast<Eigen::Index>(output_dim()), z.cols());
  for (Eigen::Index c = 0; c < z.cols(); ++c) out.col(c) = evaluate(z.col(c));
  return out;
}

Matrix LatentMap::jacobian_fd(const Vector& z, double step) const {
  check_dim(z);
  Vector h = step_sizes(z, step);
  Matrix values = evaluate_batch(stencil(z, h));
  if (!values.allFinite()) throw std::domain_error("decoder produced a non-finite value");
  return central_columns(values, z, h);
}

Vector LatentMap::jacobian_fd_apply(const Vector& z, const Vector& delta, double step) const {
  check_dim(delta);
  return jacobian_fd(z, step) * delta;
}

Matrix jacobian_fd(const LatentMap& map, const Vector& z, double step) { return map.jacobian_fd(z, step); }

JacobianTerm jacobian_term(const LatentMap& map, const Vector& zi, const Vector& zj, double step) {
  if (zi.size() != zj.size()) throw std::invalid_argument("jacobian_term: dimension mismatch");
  Vector mid = 0.5 * (zi + zj);
  Vector delta = zj - zi;
  JacobianTerm t;
  t.step = step;
  if (delta.isZero(0.0)) {
    step_sizes(mid, step);
    return t;
  }
  t.value = map.jacobian_fd_apply(mid, delta, step).norm();
  return t;
}

Vector IdentityMap::evaluate(const Vector& z) const {
  check_dim(z);
  return z;
}

Vector LinearMap::evaluate(const Vector& z) const {
  check_dim(z);
  return m_ * z;
}

Matrix LinearMap::evaluate_batch(const Matrix& z) const { return m_ * z; }

SyntheticDecoder::SyntheticDecoder(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
  if (b_.rows() != b_.cols() || a_.cols() != b_.rows()) throw std::invalid_argument("synthetic decoder shape mismatch");
}

SyntheticDecoder SyntheticDecoder::random(std::size_t d, std::size_t outputs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  Matrix a(static_cast<Eigen::Index>(outputs), static_cast<Eigen::Index>(d));
  Matrix b(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = g(rng);
  return SyntheticDecoder(std::move(a), std::move(b));
}

Vector SyntheticDecoder::evaluate(const Vector& z) const {
  check_dim(z);
  return a_ * (b_ * z).array().tanh().matrix();
}

Matrix SyntheticDecoder::evaluate_batch(const Matrix& z) const { return a_ * (b_ * z).array().tanh().matrix(); }

Matrix SyntheticDecoder::jacobian(const Vector& z) const {
  check_dim(z);
  Vector t = (b_ * z).array().tanh();
  Vector slope = 1.0 - t.array().square();
  return a_ * slope.asDiagonal() * b_;
}

LogitMatrix LogitDecoder::decode_logits(const Vector& z) const {
  Vector v = evaluate(z);
  require_finite(v, "decoder");
  return LogitMatrix(t_max(), width(), std::vector<double>(v.data(), v.data() + v.size()));
}

DecoderOutput LogitDecoder::decode(const Vector& z, const Grammar& grammar) const {
  if (width() != grammar.rule_width()) throw std::invalid_argument("decoder width does not match the grammar");
  DecoderOutput out;
  out.logits = decode_logits(z);
  StackDecodeResult r = stack_decode(out.logits, grammar);
  out.rules = std::move(r.rules);
  out.text = std::move(r.text);
  out.complete = out.rules.complete;
  if (!out.complete) {
    out.reasons.push_back("incomplete derivation");
    return out;
  }
  ValidityReport report = validate_smiles(out.text, grammar);
  out.valid = report.valid;
  out.reasons = std::move(report.reasons);
  return out;
}

ReshapedDecoder::ReshapedDecoder(const LatentMap& inner, std::size_t t_max, std::size_t width)
    : inner_(inner), t_max_(t_max), width_(width) {
  if (inner.output_dim() != t_max * width) throw std::invalid_argument("reshape does not match the output size");
}

DecoderWeights random_decoder_weights(const Grammar& grammar, std::size_t d, std::size_t t_max, std::size_t hidden,
                                      std::uint64_t seed) {
  if (d == 0 || t_max == 0 || hidden == 0) throw std::invalid_argument("decoder dimensions must be positive");
  DecoderWeights w;
  w.d = d;
  w.t_max = t_max;
  w.n_prod = grammar.rule_width();
  w.hidden = hidden;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const double in_scale = 4.0 / std::sqrt(static_cast<double>(d));
  const double out_scale = 2.0 / std::sqrt(static_cast<double>(hidden));
  w.w1.resize(hidden * d);
  for (auto& x : w.w1) x = static_cast<float>(in_scale * g(rng));
  w.b1.resize(hidden);
  for (auto& x : w.b1) x = static_cast<float>(0.5 * g(rng));
  w.w2.resize(t_max * w.n_prod * hidden);
  for (auto& x : w.w2) x = static_cast<float>(out_scale * g(rng));
  w.b2.resize(t_max * w.n_prod);
  for (std::size_t t = 0; t < t_max; ++t) {
    double closing = closing_bias(t, t_max);
    for (std::size_t p = 0; p < w.n_prod; ++p) {
      double bias = 0.3 * g(rng);
      if (p < grammar.production_count() && grammar.productions()[p].is_epsilon()) bias += closing;
      w.b2[t * w.n_prod + p] = static_cast<float>(bias);
    }
  }
  return w;
}

void fit_rule_prior(DecoderWeights& w, const Grammar& grammar, std::span<const RuleSequence> corpus,
                    double smoothing, double closing_ramp) {
  if (w.n_prod != grammar.rule_width()) throw std::invalid_argument("decoder width does not match the grammar");
  if (!(smoothing > 0.0)) throw std::invalid_argument("smoothing must be positive");
  if (!(closing_ramp >= 0.0)) throw std::invalid_argument("closing_ramp must be non-negative");
  std::vector<double> counts(grammar.production_count(), 0.0);
  for (const auto& seq : corpus) {
    for (std::size_t id : seq.rule_ids) {
      if (id < counts.size()) counts[id] += 1.0;
    }
  }
  std::vector<double> prior(w.n_prod, -10.0);  // the pad column is masked anyway
  for (std::uint32_t nt = 0; nt < grammar.nonterminals().size(); ++nt) {
    auto alts = grammar.alternatives(nt);
    double total = 0.0;
    for (std::size_t p : alts) total += counts[p] + smoothing;
    for (std::size_t p : alts) prior[p] = std::log((counts[p] + smoothing) / total);
  }
  for (std::size_t t = 0; t < w.t_max; ++t) {
    for (std::size_t p = 0; p < w.n_prod; ++p) {
      double bias = prior[p];
      if (p < grammar.production_count() && grammar.productions()[p].is_epsilon()) {
        bias += closing_ramp * closing_bias(t, w.t_max);
      }
      w.b2[t * w.n_prod + p] = static_cast<float>(bias);
    }
  }
}

void save_decoder_weights(const DecoderWeights& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kDecoderMagic, sizeof kDecoderMagic);
  write_u64(out, w.d);
  write_u64(out, w.t_max);
  write_u64(out, w.n_prod);
  write_u64(out, w.hidden);
  write_floats(out, w.w1);
  write_floats(out, w.b1);
  write_floats(out, w.w2);
  write_floats(out, w.b2);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

DecoderWeights load_decoder_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, 8)) throw FormatError("truncated decoder weight file");
  if (std::memcmp(magic, kDecoderMagic, 8) != 0) throw FormatError("not a DECW0001 decoder weight file");
  DecoderWeights w;
  w.d = read_u64(in);
  w.t_max = read_u64(in);
  w.n_prod = read_u64(in);
  w.hidden = read_u64(in);
  constexpr std::uint64_t kLimit = 1ULL << 28;
  if (w.d == 0 || w.t_max == 0 || w.n_prod == 0 || w.hidden == 0 || w.d > kLimit || w.hidden > kLimit ||
      w.t_max * w.n_prod > kLimit || w.t_max * w.n_prod * w.hidden > kLimit) {
    throw FormatError("implausible decoder dimensions");
  }
  w.w1 = read_floats(in, w.hidden * w.d);
  w.b1 = read_floats(in, w.hidden);
  w.w2 = read_floats(in, w.t_max * w.n_prod * w.hidden);
  w.b2 = read_floats(in, w.t_max * w.n_prod);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in decoder weight file");
  return w;
}

GrammarLogitDecoder::GrammarLogitDecoder(const DecoderWeights& w) : t_max_(w.t_max), n_prod_(w.n_prod) {
  if (w.w1.size() != w.hidden * w.d || w.b1.size() != w.hidden || w.w2.size() != w.t_max * w.n_prod * w.hidden ||
      w.b2.size() != w.t_max * w.n_prod) {
    throw std::invalid_argument("decoder weight arrays do not match their dimensions");
  }
  w1_ = map_floats(w.w1, w.hidden, w.d);
  b1_ = vector_floats(w.b1);
  w2_ = map_floats(w.w2, w.t_max * w.n_prod, w.hidden);
  b2_ = vector_floats(w.b2);
}

Vector GrammarLogitDecoder::evaluate(const Vector& z) const {
  check_dim(z);
  Vector h = (w1_ * z + b1_).array().tanh();
  return w2_ * h + b2_;
}

Matrix GrammarLogitDecoder::evaluate_batch(const Matrix& z) const {
  Matrix h = ((w1_ * z).colwise() + b1_).array().tanh();
  return (w2_ * h).colwise() + b2_;
}

Vector GrammarLogitDecoder::jacobian_fd_apply(const Vector& z, const Vector& delta, double step) const {
  check_dim(z);
  check_dim(delta);
  Vector h = step_sizes(z, step);
  Matrix pts = stencil(z, h);
  Matrix hidden = ((w1_ * pts).colwise() + b1_).array().tanh();
  // W2 is linear, so differencing the hidden layer first gives the same quotient.
  Matrix dh = central_columns(hidden, z, h);
  Vector out = w2_ * (dh * delta);
  require_finite(out, "decoder");
  return out;
}

ProjectionEncoder::ProjectionEncoder(std::size_t d, std::size_t nbits, std::uint64_t seed)
    : d_(d), nbits_(nbits), seed_(seed) {
  if (d == 0 || nbits == 0) throw std::invalid_argument("encoder dimensions must be positive");
  r_.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(nbits));
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < nbits; ++c) {
    for (std::size_t r = 0; r < d; ++r) r_(r, c) = (rng() >> 63) ? 1.0 : -1.0;
  }
}

Vector ProjectionEncoder::encode(const Fingerprint& fp) const {
  if (fp.nbits() != nbits_) throw std::invalid_argument("fingerprint width does not match the encoder");
  Vector z = Vector::Zero(static_cast<Eigen::Index>(d_));
  for (std::size_t b : fp.on_bits()) z += r_.col(static_cast<Eigen::Index>(b));
  return z / std::sqrt(static_cast<double>(nbits_));
}

Vector ProjectionEncoder::encode(const MolGraph& mol) const { return encode(fingerprint(mol, nbits_)); }

}  // namespace mantra
