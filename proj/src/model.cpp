#include "dml/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dml/rng.hpp"

namespace dml {

namespace {

void validate_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2)
    throw ConfigError("model needs at least one layer (got " +
                      std::to_string(dims.size()) + " dims)");
  for (std::size_t d : dims)
    if (d < 1) throw ConfigError("model layer dims must be >= 1");
  if (dims.back() < 2) throw ConfigError("embedding dim must be >= 2");
}

// %.17g: shortest decimal that round-trips any double exactly.
std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].size(); ++i)
      weights[l].data()[i] += other.weights[l].data()[i];
    for (std::size_t i = 0; i < biases[l].size(); ++i)
      biases[l][i] += other.biases[l][i];
  }
}

void Gradients::scale(double factor) {
  for (auto& w : weights)
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] *= factor;
  for (auto& b : biases)
    for (double& v : b) v *= factor;
}

bool Gradients::all_finite() const {
  for (const auto& w : weights)
    if (!w.all_finite()) return false;
  for (const auto& b : biases)
    for (double v : b)
      if (!std::isfinite(v)) return false;
  return true;
}

Gradients zero_gradients(const EmbeddingModel& model) {
  Gradients g;
  g.weights.reserve(model.layer_count());
  g.biases.reserve(model.layer_count());
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    g.weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
    g.biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

EmbeddingModel init_model(const std::vector<std::size_t>& layer_dims,
                          std::uint64_t seed) {
  validate_dims(layer_dims);
  EmbeddingModel model;
  model.layer_dims = layer_dims;
  Rng rng(mix_seed(seed, 0x6d6f64656cULL));
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    const std::size_t fan_out = layer_dims[l + 1];
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = stddev * rng.gaussian();
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

ForwardTrace forward_trace(const EmbeddingModel& model, const Matrix& batch) {
  if (batch.cols() != model.input_dim())
    throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                     " columns, model expects " + std::to_string(model.input_dim()));
  if (!batch.all_finite()) throw NumericError("forward: non-finite input batch");

  const std::size_t n = batch.rows();
  const std::size_t layers = model.layer_count();

  ForwardTrace trace;
  trace.activations.reserve(layers + 1);
  trace.activations.push_back(batch);

  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& in = trace.activations.back();
    const Matrix& w = model.weights[l];
    const std::vector<double>& b = model.biases[l];
    const bool hidden = l + 1 < layers;

    Matrix out(n, w.rows());
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = in.row(r);
      for (std::size_t j = 0; j < w.rows(); ++j) {
        double acc = b[j];
        const auto wrow = w.row(j);
        for (std::size_t k = 0; k < wrow.size(); ++k) acc += wrow[k] * row[k];
        out(r, j) = hidden ? (acc > 0.0 ? acc : 0.0) : acc;
      }
    }
    trace.activations.push_back(std::move(out));
  }

  const Matrix& prenorm = trace.activations.back();
  trace.embeddings = Matrix(n, prenorm.cols());
  trace.prenorm_norms.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double len = norm(prenorm.row(r));
    if (!std::isfinite(len))
      throw NumericError("forward: non-finite activations (exploding parameters?)");
    trace.prenorm_norms[r] = len;
    if (len < kNormGuard) {
      trace.degenerate = true;
      trace.embeddings(r, 0) = 1.0;  // deterministic fallback: e1
    } else {
      for (std::size_t c = 0; c < prenorm.cols(); ++c)
        trace.embeddings(r, c) = prenorm(r, c) / len;
    }
  }
  return trace;
}

Matrix forward(const EmbeddingModel& model, const Matrix& batch) {
  return forward_trace(model, batch).embeddings;
}

Gradients backward(const EmbeddingModel& model, const ForwardTrace& trace,
                   const Matrix& upstream) {
  const std::size_t n = trace.embeddings.rows();
  const std::size_t layers = model.layer_count();
  if (upstream.rows() != n || upstream.cols() != model.embedding_dim())
    throw ShapeError("backward: upstream gradient is " + std::to_string(upstream.rows()) +
                     "x" + std::to_string(upstream.cols()) + ", expected " +
                     std::to_string(n) + "x" + std::to_string(model.embedding_dim()));

  // Through the normalization: dz = (u - (u.y) y) / ||z|| per row.
  Matrix delta(n, model.embedding_dim());
  for (std::size_t r = 0; r < n; ++r) {
    const double len = trace.prenorm_norms[r];
    if (len < kNormGuard) continue;  // fallback row is locally constant
    const auto y = trace.embeddings.row(r);
    const auto u = upstream.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < y.size(); ++c) dot += u[c] * y[c];
    for (std::size_t c = 0; c < y.size(); ++c) delta(r, c) = (u[c] - dot * y[c]) / len;
  }

  Gradients grads = zero_gradients(model);
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& in = trace.activations[l];
    const Matrix& w = model.weights[l];
    Matrix& dw = grads.weights[l];
    std::vector<double>& db = grads.biases[l];

    for (std::size_t r = 0; r < n; ++r) {
      const auto d = delta.row(r);
      const auto a = in.row(r);
      for (std::size_t j = 0; j < w.rows(); ++j) {
        const double dj = d[j];
        if (dj == 0.0) continue;
        db[j] += dj;
        auto dwrow = dw.row(j);
        for (std::size_t k = 0; k < a.size(); ++k) dwrow[k] += dj * a[k];
      }
    }

    if (l == 0) break;

    // Propagate to the previous layer; previous layers are hidden, so gate
    // by the stored post-ReLU activation.
    Matrix prev(n, w.cols());
    for (std::size_t r = 0; r < n; ++r) {
      const auto d = delta.row(r);
      auto out = prev.row(r);
      for (std::size_t j = 0; j < w.rows(); ++j) {
        const double dj = d[j];
        if (dj == 0.0) continue;
        const auto wrow = w.row(j);
        for (std::size_t k = 0; k < wrow.size(); ++k) out[k] += dj * wrow[k];
      }
      const auto act = in.row(r);
      for (std::size_t k = 0; k < act.size(); ++k)
        if (act[k] <= 0.0) out[k] = 0.0;
    }
    delta = std::move(prev);
  }
  return grads;
}

Gradients backward(const EmbeddingModel& model, const Matrix& batch,
                   const Matrix& upstream) {
  return backward(model, forward_trace(model, batch), upstream);
}

void write_model(const EmbeddingModel& model, std::ostream& out) {
  out << "dims:";
  for (std::size_t i = 0; i < model.layer_dims.size(); ++i)
    out << (i == 0 ? " " : ",") << model.layer_dims[i];
  out << "\n";
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const Matrix& w = model.weights[l];
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const auto row = w.row(r);
      for (std::size_t c = 0; c < row.size(); ++c)
        out << (c == 0 ? "" : " ") << format_g17(row[c]);
      out << "\n";
    }
    const auto& b = model.biases[l];
    for (std::size_t c = 0; c < b.size(); ++c)
      out << (c == 0 ? "" : " ") << format_g17(b[c]);
    out << "\n";
  }
}

void save_model(const EmbeddingModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  write_model(model, out);
  if (!out) throw IoError("failed writing model file: " + path);
}

EmbeddingModel read_model(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("model file: missing header line");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header.rfind("dims:", 0) != 0)
    throw ParseError("model file: header must start with 'dims:'");

  std::vector<std::size_t> dims;
  {
    std::string rest = header.substr(5);
    std::stringstream ss(rest);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(tok, &pos);
      } catch (const std::exception&) {
        throw ParseError("model file: bad dim token '" + tok + "'");
      }
      while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
      if (pos != tok.size()) throw ParseError("model file: bad dim token '" + tok + "'");
      dims.push_back(static_cast<std::size_t>(v));
    }
  }
  validate_dims(dims);

  EmbeddingModel model;
  model.layer_dims = dims;
  auto next_value = [&in](double& out_val) {
    if (!(in >> out_val)) throw ParseError("model file: truncated parameter block");
    if (!std::isfinite(out_val))
      throw ParseError("model file: non-finite parameter value");
  };
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix w(dims[l + 1], dims[l]);
    for (std::size_t i = 0; i < w.size(); ++i) next_value(w.data()[i]);
    std::vector<double> b(dims[l + 1]);
    for (double& v : b) next_value(v);
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  double extra;
  if (in >> extra) throw ParseError("model file: trailing data after parameters");
  return model;
}

EmbeddingModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  return read_model(in);
}

}  // namespace dml
