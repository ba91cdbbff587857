#include "sinodiff/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sinodiff/error.hpp"

namespace sinodiff {

namespace {

constexpr char kMagic[4] = {'P', 'D', 'C', 'T'};
constexpr std::uint8_t kLayoutSingle = 0;
constexpr std::uint8_t kLayoutMulti = 1;
constexpr std::size_t kMaxRank = 8;

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
  }

  void bytes(const void* p, std::size_t n) {
    auto b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }

  void payload(const std::vector<double>& values, DType dtype) {
    for (double v : values) {
      if (dtype == DType::Float32) {
        put(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      } else {
        put(std::bit_cast<std::uint64_t>(v));
      }
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::vector<double> payload(std::uint64_t count, DType dtype) {
    const std::size_t width = dtype == DType::Float32 ? 4 : 8;
    if (count > (in_.size() - pos_) / width) {
      throw FormatError("truncated container: payload needs " + std::to_string(count * width) +
                        " bytes, " + std::to_string(in_.size() - pos_) + " available");
    }
    std::vector<double> values(count);
    for (auto& v : values) {
      if (dtype == DType::Float32) {
        v = std::bit_cast<float>(get<std::uint32_t>("payload"));
      } else {
        v = std::bit_cast<double>(get<std::uint64_t>("payload"));
      }
    }
    return values;
  }

  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw FormatError(std::string("truncated container while reading ") + what);
    }
  }

  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

void write_dims(Writer& w, const Tensor& t) {
  if (t.dims.size() > kMaxRank) throw ValidationError("tensor rank exceeds 8");
  if (t.element_count() != t.values.size()) {
    throw ValidationError("tensor dims do not match value count");
  }
  w.put(static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) w.put(d);
}

Tensor read_body(Reader& r, DType dtype) {
  Tensor t;
  const auto rank = r.get<std::uint8_t>("rank");
  if (rank > kMaxRank) {
    throw FormatError("unsupported tensor rank " + std::to_string(rank));
  }
  t.dims.resize(rank);
  for (auto& d : t.dims) d = r.get<std::uint64_t>("dims");
  t.values = r.payload(t.element_count(), dtype);
  return t;
}

DType read_header(Reader& r, std::uint8_t expected_layout) {
  if (r.string(4, "magic") != std::string(kMagic, 4)) {
    throw FormatError("bad magic: not a PDCT container");
  }
  const auto version = r.get<std::uint16_t>("version");
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version));
  }
  const auto code = r.get<std::uint8_t>("dtype");
  if (code != 0 && code != 1) {
    throw FormatError("unsupported dtype code " + std::to_string(code));
  }
  const auto layout = r.get<std::uint8_t>("layout");
  if (layout != expected_layout) {
    throw FormatError(expected_layout == kLayoutSingle
                          ? "expected a single-tensor container"
                          : "expected a multi-tensor container");
  }
  return static_cast<DType>(code);
}

void write_header(Writer& w, DType dtype, std::uint8_t layout) {
  w.bytes(kMagic, 4);
  w.put(kContainerVersion);
  w.put(static_cast<std::uint8_t>(dtype));
  w.put(layout);
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

std::uint64_t Tensor::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor to_tensor(const Eigen::ArrayXXd& a) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(a.rows()), static_cast<std::uint64_t>(a.cols())};
  t.values.resize(a.size());
  Eigen::Map<Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.values.data(), a.rows(), a.cols()) = a;
  return t;
}

Eigen::ArrayXXd to_array(const Tensor& t) {
  if (t.dims.size() != 2) {
    throw ValidationError("expected a rank-2 tensor, got rank " + std::to_string(t.dims.size()));
  }
  return Eigen::Map<const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.values.data(), static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]));
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype) {
  std::vector<std::uint8_t> out;
  Writer w(out);
  write_header(w, dtype, kLayoutSingle);
  write_dims(w, t);
  w.payload(t.values, dtype);
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const DType dtype = read_header(r, kLayoutSingle);
  Tensor t = read_body(r, dtype);
  if (!r.at_end()) throw FormatError("trailing bytes after tensor payload");
  return t;
}

std::vector<std::uint8_t> encode_tensors(const TensorMap& tensors, DType dtype) {
  std::vector<std::uint8_t> out;
  Writer w(out);
  write_header(w, dtype, kLayoutMulti);
  w.put(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.put(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    write_dims(w, t);
    w.payload(t.values, dtype);
  }
  return out;
}

TensorMap decode_tensors(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const DType dtype = read_header(r, kLayoutMulti);
  const auto count = r.get<std::uint32_t>("tensor count");
  TensorMap tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = r.get<std::uint32_t>("name length");
    std::string name = r.string(len, "tensor name");
    tensors[name] = read_body(r, dtype);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last tensor");
  return tensors;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype) {
  spill(path, encode_tensor(t, dtype));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(slurp(path)); }

void write_tensors(const std::filesystem::path& path, const TensorMap& tensors, DType dtype) {
  spill(path, encode_tensors(tensors, dtype));
}

TensorMap read_tensors(const std::filesystem::path& path) { return decode_tensors(slurp(path)); }

}  // namespace sinodiff
