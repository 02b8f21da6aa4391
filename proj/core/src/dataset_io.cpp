#include "ricl/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ricl/csv.hpp"
#include "ricl/error.hpp"

namespace ricl {
namespace {

template <typename Derived>
void write_values(std::ostream& out, const Eigen::DenseBase<Derived>& v) {
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) out << ' ' << format_double(v(i, j));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word(const char* what) {
    std::string w;
    if (!(in_ >> w)) fail(ErrorKind::kSchemaError, std::string("dataset: missing ") + what);
    return w;
  }
  void expect(const std::string& token) {
    const auto w = word(token.c_str());
    if (w != token) {
      fail(ErrorKind::kSchemaError, "dataset: expected '" + token + "', found '" + w + "'");
    }
  }
  double number(const char* what) { return parse_double(word(what)); }
  std::uint64_t count(const char* what) {
    const auto w = word(what);
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(w, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != w.size() || w.empty() || w.front() == '-') {
      fail(ErrorKind::kSchemaError, std::string("dataset: bad ") + what + " '" + w + "'");
    }
    return v;
  }

 private:
  std::istream& in_;
};

std::vector<Example> read_section(Reader& r, const std::string& name, Eigen::Index n,
                                  Eigen::Index d) {
  r.expect("section");
  r.expect(name);
  const auto count = r.count("section count");
  std::vector<Example> out(count);
  for (auto& e : out) {
    r.expect("A");
    e.a.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) e.a(i, j) = r.number("A entry");
    r.expect("b");
    e.b.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) e.b(i) = r.number("b entry");
  }
  return out;
}

void write_section(std::ostream& out, const std::string& name, const std::vector<Example>& set) {
  out << "section " << name << ' ' << set.size() << '\n';
  for (const auto& e : set) {
    out << 'A';
    write_values(out, e.a);
    out << "\nb";
    write_values(out, e.b);
    out << '\n';
  }
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& ds) {
  out << "RICLDATA 1\n";
  out << "seed " << ds.seed << '\n';
  out << "kind " << ds.kind.name() << ' ' << format_double(ds.kind.mean) << ' '
      << format_double(ds.kind.std) << '\n';
  out << "shape " << ds.task.n << ' ' << ds.task.d << '\n';
  out << "x_true";
  write_values(out, ds.task.x_true);
  out << '\n';
  write_section(out, "prefix", ds.prefix);
  write_section(out, "validation", ds.validation);
  write_section(out, "test", ds.test);
}

Dataset read_dataset(std::istream& in) {
  Reader r(in);
  r.expect("RICLDATA");
  const auto version = r.count("version");
  require(version == 1, ErrorKind::kSchemaError,
          "dataset: unsupported version " + std::to_string(version));
  Dataset ds;
  r.expect("seed");
  ds.seed = r.count("seed");
  r.expect("kind");
  const auto kind = r.word("kind name");
  const double mean = r.number("kind mean");
  const double std = r.number("kind std");
  try {
    ds.kind = PrefixKind::parse(kind, 0.0);
  } catch (const Error&) {
    fail(ErrorKind::kSchemaError, "dataset: unknown kind '" + kind + "'");
  }
  ds.kind.mean = mean;
  ds.kind.std = std;
  r.expect("shape");
  ds.task.n = static_cast<Eigen::Index>(r.count("n"));
  ds.task.d = static_cast<Eigen::Index>(r.count("d"));
  require(ds.task.n >= 1 && ds.task.d >= 1, ErrorKind::kSchemaError, "dataset: empty shape");
  r.expect("x_true");
  ds.task.x_true.resize(ds.task.d);
  for (Eigen::Index i = 0; i < ds.task.d; ++i) ds.task.x_true(i) = r.number("x_true entry");
  ds.prefix = read_section(r, "prefix", ds.task.n, ds.task.d);
  ds.task.m = static_cast<Eigen::Index>(ds.prefix.size());
  ds.validation = read_section(r, "validation", ds.task.n, ds.task.d);
  ds.test = read_section(r, "test", ds.task.n, ds.task.d);
  std::string extra;
  require(!(in >> extra), ErrorKind::kSchemaError, "dataset: trailing data '" + extra + "'");
  return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIoError, "cannot open " + path + " for writing");
  write_dataset(out, ds);
  require(static_cast<bool>(out), ErrorKind::kIoError, "write to " + path + " failed");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIoError, "cannot open " + path);
  return read_dataset(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  out << "section,example,field,row,col,value\n";
  for (Eigen::Index j = 0; j < ds.task.x_true.size(); ++j) {
    out << "task,0,x_true,0," << j << ',' << format_double(ds.task.x_true(j)) << '\n';
  }
  auto section = [&](const char* name, const std::vector<Example>& set) {
    for (std::size_t k = 0; k < set.size(); ++k) {
      const auto& e = set[k];
      for (Eigen::Index i = 0; i < e.a.rows(); ++i)
        for (Eigen::Index j = 0; j < e.a.cols(); ++j)
          out << name << ',' << k << ",A," << i << ',' << j << ',' << format_double(e.a(i, j))
              << '\n';
      for (Eigen::Index i = 0; i < e.b.size(); ++i)
        out << name << ',' << k << ",b," << i << ",0," << format_double(e.b(i)) << '\n';
    }
  };
  section("prefix", ds.prefix);
  section("validation", ds.validation);
  section("test", ds.test);
}

}  // namespace ricl
