#include "psstn/io.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "psstn/errors.hpp"

namespace psstn {
namespace {

constexpr char kMagic[] = "PSSTN1";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw IoError("model container is truncated");
    char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  std::string take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw IoError("model container is truncated");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string serialize_model(const PolynomialStateSpace& model) {
  std::string out(kMagic, kMagicLen);
  const auto d = static_cast<std::uint32_t>(model.d());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.n()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.m()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.p()));
  put<std::uint32_t>(out, d);
  for (Index r : model.bd().ranks()) put<std::uint32_t>(out, static_cast<std::uint32_t>(r));
  for (Index i = 0; i < model.A().rows(); ++i)
    for (Index j = 0; j < model.A().cols(); ++j) put<double>(out, model.A()(i, j));
  for (Index i = 0; i < model.C().rows(); ++i)
    for (Index j = 0; j < model.C().cols(); ++j) put<double>(out, model.C()(i, j));
  for (const auto& core : model.bd().cores())
    for (Index i = 0; i < core.size(); ++i) put<double>(out, core.data()(i));
  return out;
}

PolynomialStateSpace deserialize_model(const std::string& bytes) {
  Reader in(bytes);
  if (in.take(kMagicLen) != std::string(kMagic, kMagicLen)) throw IoError("not a model container (bad magic)");
  const Index n = in.get<std::uint32_t>();
  const Index m = in.get<std::uint32_t>();
  const Index p = in.get<std::uint32_t>();
  const Index d = in.get<std::uint32_t>();
  if (m < 1 || p < 1 || d < 1) throw IoError("model container has invalid dimensions");
  std::vector<Index> ranks(static_cast<std::size_t>(d + 1));
  for (auto& r : ranks) r = in.get<std::uint32_t>();
  if (ranks.front() != 1 || ranks.back() != 1) throw IoError("model container boundary ranks must be 1");

  Eigen::MatrixXd A(n, n), C(p, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = in.get<double>();
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < n; ++j) C(i, j) = in.get<double>();
  std::vector<Tensor> cores;
  for (Index k = 0; k < d; ++k) {
    const Index rows = (k + 1 == d) ? p + n : 1;
    Tensor core(Dims{ranks[k], rows, m, ranks[k + 1]});
    for (Index i = 0; i < core.size(); ++i) core.data()(i) = in.get<double>();
    cores.push_back(std::move(core));
  }
  if (!in.done()) throw IoError("model container has trailing bytes");
  try {
    return PolynomialStateSpace(std::move(A), std::move(C), Mpo(std::move(cores)));
  } catch (const InputError& e) {
    throw IoError(std::string("model container is inconsistent: ") + e.what());
  }
}

void write_model(const std::filesystem::path& path, const PolynomialStateSpace& model) {
  write_file(path, serialize_model(model));
}

PolynomialStateSpace read_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_signal_csv(const SignalTable& table) {
  const Index L = std::max(table.inputs.rows(), table.outputs.rows());
  if ((table.inputs.cols() > 0 && table.inputs.rows() != L) || (table.outputs.cols() > 0 && table.outputs.rows() != L))
    throw DimensionMismatch("signal table columns have different lengths");
  std::string out = "t";
  for (Index j = 0; j < table.inputs.cols(); ++j) out += ",u_" + std::to_string(j + 1);
  for (Index j = 0; j < table.outputs.cols(); ++j) out += ",y_" + std::to_string(j + 1);
  out += '\n';
  for (Index t = 0; t < L; ++t) {
    out += std::to_string(t);
    for (Index j = 0; j < table.inputs.cols(); ++j) out += ',' + format_double(table.inputs(t, j));
    for (Index j = 0; j < table.outputs.cols(); ++j) out += ',' + format_double(table.outputs(t, j));
    out += '\n';
  }
  return out;
}

SignalTable parse_signal_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("signal CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);
  if (header.empty() || header[0] != "t") throw IoError("signal CSV header must start with 't'");
  Index nu = 0, ny = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string& h = header[c];
    const bool is_u = h == "u_" + std::to_string(nu + 1);
    const bool is_y = h == "y_" + std::to_string(ny + 1);
    if (is_u && ny == 0)
      ++nu;
    else if (is_y)
      ++ny;
    else
      throw IoError("unexpected signal CSV column '" + h + "'");
  }

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw IoError("signal CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                    " fields, expected " + std::to_string(header.size()));
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const char* s = fields[c].c_str();
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(s, &end);
      if (end == s || *end != '\0' || (errno == ERANGE && std::abs(v) > 1.0))
        throw IoError("signal CSV line " + std::to_string(line_no) + ": cannot parse '" + fields[c] + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }

  SignalTable table;
  const auto L = static_cast<Index>(rows.size());
  table.inputs.resize(L, nu);
  table.outputs.resize(L, ny);
  for (Index t = 0; t < L; ++t) {
    for (Index j = 0; j < nu; ++j) table.inputs(t, j) = rows[t][j];
    for (Index j = 0; j < ny; ++j) table.outputs(t, j) = rows[t][nu + j];
  }
  return table;
}

void write_signal_csv(const std::filesystem::path& path, const SignalTable& table) {
  write_file(path, format_signal_csv(table));
}

SignalTable read_signal_csv(const std::filesystem::path& path) { return parse_signal_csv(read_file(path)); }

}  // namespace psstn
