#include "gesturemap/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gesturemap/error.hpp"

namespace gesturemap {

const Vector* VectorStore::find(const std::string& token) const {
  auto it = vectors.find(token);
  return it == vectors.end() ? nullptr : &it->second;
}

const Vector* VectorStore::find_symbol(const std::string& symbol) const {
  auto it = symbol_vectors.find(symbol);
  return it == symbol_vectors.end() ? nullptr : &it->second;
}

namespace {

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string at_line(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

using VectorMap = std::unordered_map<std::string, Vector>;

std::size_t parse_rows(std::string_view text, std::optional<std::size_t> expect_dim, VectorMap& into,
                       std::vector<std::string>* warnings) {
  std::optional<std::size_t> dim = expect_dim;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto cols = fields(line);
    if (cols.empty()) continue;

    if (first_content_line) {
      first_content_line = false;
      std::size_t count = 0;
      std::size_t header_dim = 0;
      if (cols.size() == 2 && parse_size(cols[0], count) && parse_size(cols[1], header_dim)) {
        if (header_dim == 0) throw Error(ErrorCode::ParseError, at_line(line_no) + "header dimension is 0");
        if (dim && *dim != header_dim) {
          throw Error(ErrorCode::DimensionMismatch, at_line(line_no) + "header dimension " +
                                                        std::to_string(header_dim) + " != expected " +
                                                        std::to_string(*dim));
        }
        dim = header_dim;
        continue;
      }
    }

    const std::size_t row_dim = cols.size() - 1;
    if (row_dim == 0) throw Error(ErrorCode::ParseError, at_line(line_no) + "row has no components");
    if (!dim) dim = row_dim;
    if (row_dim != *dim) {
      throw Error(ErrorCode::DimensionMismatch, at_line(line_no) + "row has " + std::to_string(row_dim) +
                                                    " components, expected " + std::to_string(*dim));
    }
    Vector v(row_dim);
    for (std::size_t k = 0; k < row_dim; ++k) {
      const auto s = cols[k + 1];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v[k]);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v[k])) {
        throw Error(ErrorCode::ParseError, at_line(line_no) + "bad component '" + std::string(s) + "'");
      }
    }
    std::string token(cols[0]);
    if (into.count(token) && warnings) {
      warnings->push_back(at_line(line_no) + "duplicate token '" + token + "', keeping the last row");
    }
    into[std::move(token)] = std::move(v);
  }
  if (!dim) throw Error(ErrorCode::ParseError, "empty vector file and no expected dimension");
  if (into.empty() && warnings) warnings->push_back("vector file holds no vectors");
  return *dim;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open vector file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

VectorStore parse_store(std::string_view text, std::optional<std::size_t> expect_dim,
                        std::vector<std::string>* warnings) {
  if (expect_dim && *expect_dim == 0) throw Error(ErrorCode::InvalidInput, "expected dimension must be positive");
  VectorStore store;
  store.dim = parse_rows(text, expect_dim, store.vectors, warnings);
  return store;
}

VectorStore load_store(const std::filesystem::path& path, std::optional<std::size_t> expect_dim,
                       std::vector<std::string>* warnings) {
  const std::string text = read_file(path);
  try {
    return parse_store(text, expect_dim, warnings);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void load_symbol_vectors(VectorStore& store, const std::filesystem::path& path, std::vector<std::string>* warnings) {
  const std::string text = read_file(path);
  try {
    parse_rows(text, store.dim, store.symbol_vectors, warnings);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with " + std::to_string(u.size()) + " and " + std::to_string(v.size()) + " components");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

PhraseVector embed_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& symbols,
                          const VectorStore& store, double w_sym) {
  if (!(w_sym >= 0.0 && w_sym <= 1.0)) throw Error(ErrorCode::OutOfRange, "w_sym must lie in [0, 1]");
  PhraseVector out;
  out.v.assign(store.dim, 0.0);

  auto mean_of = [&](const std::vector<std::string>& items, bool symbol_side, Vector& mean) {
    std::size_t found = 0;
    mean.assign(store.dim, 0.0);
    for (const auto& item : items) {
      const Vector* vec = symbol_side ? store.find_symbol(item) : store.find(item);
      if (vec == nullptr) {
        out.missed.push_back(item);
        continue;
      }
      ++found;
      for (std::size_t k = 0; k < store.dim; ++k) mean[k] += (*vec)[k];
    }
    if (found > 0) {
      for (double& x : mean) x /= static_cast<double>(found);
    }
    return found;
  };

  Vector token_mean;
  Vector symbol_mean;
  const std::size_t token_found = mean_of(tokens, false, token_mean);
  const std::size_t symbol_found = mean_of(symbols, true, symbol_mean);
  out.covered = token_found + symbol_found;

  double token_weight = 1.0 - w_sym;
  double symbol_weight = w_sym;
  if (token_found == 0) {
    token_weight = 0.0;
    symbol_weight = 1.0;
  } else if (symbol_found == 0) {
    token_weight = 1.0;
    symbol_weight = 0.0;
  }
  for (std::size_t k = 0; k < store.dim; ++k) {
    out.v[k] = token_weight * token_mean[k] + symbol_weight * symbol_mean[k];
  }
  const double norm = l2_norm(out.v);
  if (out.covered == 0 || norm == 0.0) {
    std::fill(out.v.begin(), out.v.end(), 0.0);
    out.is_zero = true;
  } else {
    for (double& x : out.v) x /= norm;
    out.is_zero = false;
  }
  return out;
}

}  // namespace gesturemap
