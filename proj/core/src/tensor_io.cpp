#include "crpca/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace crpca {

namespace {

constexpr const char* kTensorMagic = "CRPCA-TENSOR";
constexpr const char* kModelMagic = "CRPCA-MODEL";
constexpr const char* kVersion = "v1";

void put_double(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

void put_doubles(std::ostream& out, const double* v, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(v), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) put_double(out, v[i]);
  }
}

void get_doubles(std::istream& in, double* v, std::size_t n) {
  std::vector<unsigned char> bytes(n * 8);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw IoError("truncated payload: expected " + std::to_string(bytes.size()) + " bytes, got " +
                  std::to_string(in.gcount()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(b)]) << (8 * b);
    }
    v[i] = std::bit_cast<double>(bits);
  }
}

std::string read_header_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("missing header line");
  }
  return line;
}

/// Splits "key=value" tokens after the magic and version words.
std::vector<std::pair<std::string, std::string>> parse_header(const std::string& line,
                                                              const char* magic) {
  std::istringstream words(line);
  std::string m, v;
  words >> m >> v;
  if (m != magic) {
    throw IoError("bad magic '" + m + "', expected " + magic);
  }
  if (v != kVersion) {
    throw IoError("unsupported version '" + v + "'");
  }
  std::vector<std::pair<std::string, std::string>> fields;
  std::string tok;
  while (words >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw IoError("malformed header token '" + tok + "'");
    }
    fields.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  return fields;
}

const std::string& field(const std::vector<std::pair<std::string, std::string>>& fields,
                         const std::string& key) {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  throw IoError("header lacks '" + key + "'");
}

Index parse_count(const std::string& text) {
  std::size_t used = 0;
  long long v = -1;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || v < 0) {
    throw IoError("bad count '" + text + "'");
  }
  return static_cast<Index>(v);
}

Shape parse_shape2(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw IoError("bad shape '" + text + "'");
  return {parse_count(text.substr(0, x)), parse_count(text.substr(x + 1))};
}

std::string shape_text(Shape s) {
  return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

template <class Stream>
Stream open_file(const std::filesystem::path& path, std::ios::openmode mode) {
  Stream f(path, mode | std::ios::binary);
  if (!f) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  return f;
}

void ensure_parent(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
  }
}

}  // namespace

CMatrix Tensor::matrix() const {
  if (shape.size() > 2) {
    throw std::invalid_argument("tensor of rank " + std::to_string(shape.size()) +
                                " is not a matrix");
  }
  const Index rows = shape.empty() ? 1 : shape[0];
  const Index cols = shape.size() == 2 ? shape[1] : 1;
  return unvec(data, rows, cols);
}

Tensor make_tensor(const CMatrix& m, bool allow_real) {
  return {allow_real && is_real_valued(m) ? DType::f64 : DType::c128, {m.rows(), m.cols()}, vec(m)};
}

Tensor make_vector_tensor(const CVector& v, bool allow_real) {
  return {allow_real && is_real_valued(v) ? DType::f64 : DType::c128, {v.size()}, v};
}

void write_tensor(std::ostream& out, const Tensor& t) {
  Index n = 1;
  std::string shape;
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (t.shape[i] < 0) throw std::invalid_argument("negative tensor dimension");
    n *= t.shape[i];
    shape += (i ? "," : "") + std::to_string(t.shape[i]);
  }
  if (t.data.size() != n) {
    throw std::invalid_argument("tensor payload has " + std::to_string(t.data.size()) +
                                " elements, shape implies " + std::to_string(n));
  }
  out << kTensorMagic << ' ' << kVersion << " dtype=" << (t.dtype == DType::f64 ? "f64" : "c128")
      << " shape=" << shape << " layout=column-major endian=little\n";
  if (t.dtype == DType::f64) {
    const RVector re = t.data.real();
    put_doubles(out, re.data(), static_cast<std::size_t>(n));
  } else {
    put_doubles(out, reinterpret_cast<const double*>(t.data.data()), static_cast<std::size_t>(2 * n));
  }
  if (!out) throw IoError("write failed");
}

Tensor read_tensor(std::istream& in) {
  const auto fields = parse_header(read_header_line(in), kTensorMagic);
  Tensor t;
  const std::string& dtype = field(fields, "dtype");
  if (dtype == "f64") {
    t.dtype = DType::f64;
  } else if (dtype == "c128") {
    t.dtype = DType::c128;
  } else {
    throw IoError("unknown dtype '" + dtype + "'");
  }
  if (field(fields, "layout") != "column-major") throw IoError("unsupported layout");
  if (field(fields, "endian") != "little") throw IoError("unsupported byte order");
  const std::string& shape = field(fields, "shape");
  Index n = 1;
  if (!shape.empty()) {
    std::istringstream dims(shape);
    std::string d;
    while (std::getline(dims, d, ',')) {
      t.shape.push_back(parse_count(d));
      n *= t.shape.back();
    }
  }
  t.data.resize(n);
  if (t.dtype == DType::f64) {
    RVector re(n);
    get_doubles(in, re.data(), static_cast<std::size_t>(n));
    t.data = re.cast<Complex>();
  } else {
    get_doubles(in, reinterpret_cast<double*>(t.data.data()), static_cast<std::size_t>(2 * n));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("trailing bytes after tensor payload");
  }
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  ensure_parent(path);
  auto f = open_file<std::ofstream>(path, std::ios::out | std::ios::trunc);
  try {
    write_tensor(f, t);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Tensor load_tensor(const std::filesystem::path& path) {
  auto f = open_file<std::ifstream>(path, std::ios::in);
  try {
    return read_tensor(f);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_model(std::ostream& out, const UnfoldedModel& model) {
  model.validate();
  out << kModelMagic << ' ' << kVersion << " layers=" << model.num_layers()
      << " decay=" << to_string(model.decay_kind) << " K=" << model.ops.measurements()
      << " lowrank=" << shape_text(model.ops.lowrank_shape())
      << " sparse=" << shape_text(model.ops.sparse_shape()) << '\n';
  for (const auto& p : model.layers) {
    const double v[4] = {p.lambda_S, p.lambda_L, p.gamma, p.rho};
    put_doubles(out, v, 4);
  }
  if (!out) throw IoError("write failed");
}

UnfoldedModel read_model(std::istream& in, const MeasurementOperators& ops) {
  const auto fields = parse_header(read_header_line(in), kModelMagic);
  UnfoldedModel model;
  const Index layers = parse_count(field(fields, "layers"));
  try {
    model.decay_kind = parse_decay_kind(field(fields, "decay"));
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
  if (parse_count(field(fields, "K")) != ops.measurements() ||
      !(parse_shape2(field(fields, "lowrank")) == ops.lowrank_shape()) ||
      !(parse_shape2(field(fields, "sparse")) == ops.sparse_shape())) {
    throw IoError("model dimensions do not match the dataset operators");
  }
  std::vector<double> v(static_cast<std::size_t>(4 * layers));
  get_doubles(in, v.data(), v.size());
  for (Index t = 0; t < layers; ++t) {
    const double* p = v.data() + 4 * t;
    model.layers.push_back({p[0], p[1], p[2], p[3]});
  }
  model.ops = ops;
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
  return model;
}

void save_model(const std::filesystem::path& path, const UnfoldedModel& model) {
  ensure_parent(path);
  auto f = open_file<std::ofstream>(path, std::ios::out | std::ios::trunc);
  write_model(f, model);
}

UnfoldedModel load_model(const std::filesystem::path& path, const MeasurementOperators& ops) {
  auto f = open_file<std::ifstream>(path, std::ios::in);
  try {
    return read_model(f, ops);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_text(const std::filesystem::path& path, const std::string& text) {
  ensure_parent(path);
  auto f = open_file<std::ofstream>(path, std::ios::out | std::ios::trunc);
  f << text;
  if (!f) throw IoError("write failed: '" + path.string() + "'");
}

std::string load_text(const std::filesystem::path& path) {
  auto f = open_file<std::ifstream>(path, std::ios::in);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace crpca
