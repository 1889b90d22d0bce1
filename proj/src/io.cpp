#include "cpdqs/io.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "cpdqs/energy.hpp"

namespace cpdqs {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

long parse_long_token(const std::string& tok, long line) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + tok + "'", line);
  }
  if (pos != tok.size())
    throw ParseError("expected an integer, got '" + tok + "'", line);
  return v;
}

double parse_double_token(const std::string& tok, long line) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + tok + "'", line);
  }
  if (pos != tok.size())
    throw ParseError("expected a number, got '" + tok + "'", line);
  return v;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line.substr(0, line.find('#')));
  std::string t;
  while (ss >> t) toks.push_back(std::move(t));
  return toks;
}

// Accumulates records before freezing them into an immutable Instance.
struct InstanceBuilder {
  std::string name;
  BlockLayout layout;
  Eigen::VectorXd unary;
  std::vector<std::uint8_t> unary_seen;
  std::map<std::pair<Index, Index>, Eigen::MatrixXd> pairs;
  std::map<std::pair<Index, Index>, Eigen::Matrix<std::uint8_t, Eigen::Dynamic,
                                                  Eigen::Dynamic>>
      pair_seen;

  void init(std::string n, std::vector<Index> sizes) {
    name = std::move(n);
    layout = BlockLayout(std::move(sizes));
    unary = Eigen::VectorXd::Zero(layout.total());
    unary_seen.assign(static_cast<std::size_t>(layout.total()), 0);
  }

  void check_position(Index i, long line) const {
    if (i < 0 || i >= layout.blocks())
      throw ParseError("position " + std::to_string(i + 1) +
                           " outside 1.." + std::to_string(layout.blocks()),
                       line);
  }

  void check_rotamer(Index i, Index r, long line) const {
    if (r < 0 || r >= layout.size(i))
      throw ParseError("rotamer " + std::to_string(r + 1) + " outside 1.." +
                           std::to_string(layout.size(i)) + " for position " +
                           std::to_string(i + 1),
                       line);
  }

  // 0-based indices; track duplicates.
  void set_unary(Index i, Index r, double v, long line) {
    check_position(i, line);
    check_rotamer(i, r, line);
    const std::size_t k = static_cast<std::size_t>(layout.offset(i) + r);
    if (unary_seen[k])
      throw ParseError("duplicate unary record for position " +
                           std::to_string(i + 1) + " rotamer " +
                           std::to_string(r + 1),
                       line);
    unary_seen[k] = 1;
    unary[static_cast<Index>(k)] = v;
  }

  void set_pair(Index i, Index j, Index r, Index s, double v, long line) {
    check_position(i, line);
    check_position(j, line);
    if (i >= j)
      throw ParseError("pairwise record needs i < j, got i=" +
                           std::to_string(i + 1) + " j=" + std::to_string(j + 1),
                       line);
    check_rotamer(i, r, line);
    check_rotamer(j, s, line);
    auto key = std::make_pair(i, j);
    auto it = pairs.find(key);
    if (it == pairs.end()) {
      it = pairs.emplace(key, Eigen::MatrixXd::Zero(layout.size(i),
                                                    layout.size(j)))
               .first;
      pair_seen.emplace(key,
                        Eigen::Matrix<std::uint8_t, Eigen::Dynamic,
                                      Eigen::Dynamic>::Zero(layout.size(i),
                                                            layout.size(j)));
    }
    auto& seen = pair_seen.at(key);
    if (seen(r, s))
      throw ParseError("duplicate pairwise record (" + std::to_string(i + 1) +
                           ", " + std::to_string(j + 1) + ", " +
                           std::to_string(r + 1) + ", " + std::to_string(s + 1) +
                           ")",
                       line);
    seen(r, s) = 1;
    it->second(r, s) = v;
  }

  // Additive variant for the wcsp importer, where several cost functions may
  // share a scope.
  void add_pair_matrix(Index i, Index j, const Eigen::MatrixXd& values) {
    auto key = std::make_pair(i, j);
    auto it = pairs.find(key);
    if (it == pairs.end())
      pairs.emplace(key, values);
    else
      it->second += values;
  }

  Instance freeze() && {
    std::vector<PairBlock<double>> blocks;
    blocks.reserve(pairs.size());
    for (auto& [key, values] : pairs)
      blocks.push_back(PairBlock<double>{key.first, key.second, std::move(values)});
    return Instance(std::move(name), layout.sizes(), std::move(unary),
                    std::move(blocks));
  }
};

}  // namespace

Instance parse_instance(std::istream& in, const std::string& name) {
  InstanceBuilder b;
  std::string line;
  long lineno = 0;
  int preamble = 0;  // header, n, block sizes
  Index n = 0;

  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;

    if (preamble == 0) {
      if (toks.size() != 2 || toks[0] != "CPDQS" || toks[1] != "1")
        throw ParseError("expected header 'CPDQS 1'", lineno);
      preamble = 1;
    } else if (preamble == 1) {
      if (toks.size() != 1)
        throw ParseError("expected the number of positions on its own line",
                         lineno);
      const long v = parse_long_token(toks[0], lineno);
      if (v <= 0) throw ParseError("number of positions must be positive", lineno);
      n = static_cast<Index>(v);
      preamble = 2;
    } else if (preamble == 2) {
      if (static_cast<Index>(toks.size()) != n)
        throw ParseError("expected " + std::to_string(n) + " block sizes, got " +
                             std::to_string(toks.size()),
                         lineno);
      std::vector<Index> sizes;
      sizes.reserve(toks.size());
      for (const auto& t : toks) {
        const long v = parse_long_token(t, lineno);
        if (v <= 0) throw ParseError("block sizes must be positive", lineno);
        sizes.push_back(static_cast<Index>(v));
      }
      b.init(name, std::move(sizes));
      preamble = 3;
    } else if (toks[0] == "u") {
      if (toks.size() != 4)
        throw ParseError("unary record needs 'u <i> <r> <value>'", lineno);
      b.set_unary(parse_long_token(toks[1], lineno) - 1,
                  parse_long_token(toks[2], lineno) - 1,
                  parse_double_token(toks[3], lineno), lineno);
    } else if (toks[0] == "p") {
      if (toks.size() != 6)
        throw ParseError("pairwise record needs 'p <i> <j> <r> <s> <value>'",
                         lineno);
      b.set_pair(parse_long_token(toks[1], lineno) - 1,
                 parse_long_token(toks[2], lineno) - 1,
                 parse_long_token(toks[3], lineno) - 1,
                 parse_long_token(toks[4], lineno) - 1,
                 parse_double_token(toks[5], lineno), lineno);
    } else {
      throw ParseError("unknown record '" + toks[0] + "'", lineno);
    }
  }
  if (preamble < 3) throw ParseError("file ended before the block sizes", lineno);
  return std::move(b).freeze();
}

Instance parse_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return parse_instance(in, path.stem().string());
}

void write_instance(const Instance& inst, std::ostream& out) {
  const BlockLayout& layout = inst.layout();
  out << "CPDQS 1\n" << layout.blocks() << "\n";
  for (Index i = 0; i < layout.blocks(); ++i)
    out << (i ? " " : "") << layout.size(i);
  out << "\n";
  for (Index i = 0; i < layout.blocks(); ++i)
    for (Index r = 0; r < layout.size(i); ++r) {
      const double v = inst.unary()[layout.offset(i) + r];
      if (v != 0)
        out << "u " << i + 1 << " " << r + 1 << " " << fmt_double(v) << "\n";
    }
  for (const PairBlock<double>& pb : inst.pair_blocks())
    for (Index r = 0; r < pb.values.rows(); ++r)
      for (Index s = 0; s < pb.values.cols(); ++s)
        if (pb.values(r, s) != 0)
          out << "p " << pb.i + 1 << " " << pb.j + 1 << " " << r + 1 << " "
              << s + 1 << " " << fmt_double(pb.values(r, s)) << "\n";
}

void write_instance_file(const Instance& inst,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_instance(inst, out);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

namespace {

// Token reader for the whitespace-separated wcsp layout, where tuples may
// span or share physical lines.
struct TokenReader {
  std::istream& in;

  std::string next(const char* what) {
    std::string t;
    if (!(in >> t))
      throw ParseError(std::string("wcsp input ended while reading ") + what);
    return t;
  }
  long next_long(const char* what) {
    const std::string t = next(what);
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(t, &pos);
    } catch (const std::exception&) {
      throw ParseError(std::string("wcsp: expected integer for ") + what +
                       ", got '" + t + "'");
    }
    if (pos != t.size())
      throw ParseError(std::string("wcsp: expected integer for ") + what +
                       ", got '" + t + "'");
    return v;
  }
  double next_double(const char* what) {
    const std::string t = next(what);
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw ParseError(std::string("wcsp: expected number for ") + what +
                       ", got '" + t + "'");
    }
    if (pos != t.size())
      throw ParseError(std::string("wcsp: expected number for ") + what +
                       ", got '" + t + "'");
    return v;
  }
};

}  // namespace

Instance import_wcsp(std::istream& in, const std::string& name) {
  TokenReader r{in};
  r.next("problem name");
  const long nvars = r.next_long("variable count");
  if (nvars <= 0) throw UnsupportedFormatError("wcsp: no variables");
  r.next_long("max domain size");
  const long nfuncs = r.next_long("cost function count");
  r.next_double("upper bound");  // forbidden-tuple bound, not needed here

  std::vector<Index> sizes(static_cast<std::size_t>(nvars));
  for (auto& s : sizes) {
    const long d = r.next_long("domain size");
    if (d <= 0) throw UnsupportedFormatError("wcsp: nonpositive domain size");
    s = static_cast<Index>(d);
  }

  InstanceBuilder b;
  b.init(name, sizes);
  double constant = 0;

  for (long f = 0; f < nfuncs; ++f) {
    const long arity = r.next_long("cost function arity");
    if (arity == 0) {
      const double def = r.next_double("constant cost");
      const long ntuples = r.next_long("tuple count");
      double c = def;
      for (long t = 0; t < ntuples; ++t) c = r.next_double("constant cost");
      constant += c;
    } else if (arity == 1) {
      const long i = r.next_long("variable index");
      if (i < 0 || i >= nvars)
        throw UnsupportedFormatError("wcsp: variable index out of range");
      const double def = r.next_double("default cost");
      const long ntuples = r.next_long("tuple count");
      Eigen::VectorXd fn = Eigen::VectorXd::Constant(b.layout.size(i), def);
      for (long t = 0; t < ntuples; ++t) {
        const long v = r.next_long("tuple value");
        if (v < 0 || v >= b.layout.size(i))
          throw UnsupportedFormatError("wcsp: tuple value out of domain");
        fn[v] = r.next_double("tuple cost");
      }
      b.layout.segment(b.unary, i) += fn;
    } else if (arity == 2) {
      const long i = r.next_long("variable index");
      const long j = r.next_long("variable index");
      if (i < 0 || i >= nvars || j < 0 || j >= nvars || i == j)
        throw UnsupportedFormatError("wcsp: bad binary scope");
      const double def = r.next_double("default cost");
      const long ntuples = r.next_long("tuple count");
      Eigen::MatrixXd fn =
          Eigen::MatrixXd::Constant(b.layout.size(i), b.layout.size(j), def);
      for (long t = 0; t < ntuples; ++t) {
        const long vi = r.next_long("tuple value");
        const long vj = r.next_long("tuple value");
        if (vi < 0 || vi >= b.layout.size(i) || vj < 0 || vj >= b.layout.size(j))
          throw UnsupportedFormatError("wcsp: tuple value out of domain");
        fn(vi, vj) = r.next_double("tuple cost");
      }
      if (i < j)
        b.add_pair_matrix(i, j, fn);
      else
        b.add_pair_matrix(j, i, fn.transpose());
    } else {
      throw UnsupportedFormatError(
          "wcsp: cost function of arity " + std::to_string(arity) +
          " is not representable in the pairwise model");
    }
  }

  // A constant applied to one block's unary row shifts every feasible
  // assignment by exactly that constant.
  if (constant != 0) b.layout.segment(b.unary, 0).array() += constant;

  return std::move(b).freeze();
}

Instance import_wcsp_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return import_wcsp(in, path.stem().string());
}

Instance load_instance(const std::filesystem::path& path,
                       const std::string& format_hint) {
  std::string hint = format_hint;
  std::transform(hint.begin(), hint.end(), hint.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (hint.empty()) {
    const std::string ext = path.extension().string();
    if (ext == ".cpdqs") hint = "canonical";
    else if (ext == ".wcsp") hint = "wcsp";
  }
  if (hint.empty()) {
    std::ifstream probe(path);
    if (!probe) throw ParseError("cannot open '" + path.string() + "'");
    std::string first;
    probe >> first;
    hint = first == "CPDQS" ? "canonical" : "wcsp";
  }
  if (hint == "canonical") return parse_instance_file(path);
  if (hint == "wcsp") return import_wcsp_file(path);
  throw UnsupportedFormatError("unknown instance format '" + format_hint +
                               "' (supported: canonical, wcsp)");
}

bool instances_equal(const Instance& a, const Instance& b, double tol) {
  if (!(a.layout() == b.layout())) return false;
  if (((a.unary() - b.unary()).array().abs() > tol).any()) return false;
  const Index n = a.positions();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const Eigen::MatrixXd* pa = a.pair(i, j);
      const Eigen::MatrixXd* pb = b.pair(i, j);
      if (!pa && !pb) continue;
      Eigen::MatrixXd da = pa ? *pa
                              : Eigen::MatrixXd::Zero(a.layout().size(i),
                                                      a.layout().size(j));
      Eigen::MatrixXd db = pb ? *pb
                              : Eigen::MatrixXd::Zero(a.layout().size(i),
                                                      a.layout().size(j));
      if (((da - db).array().abs() > tol).any()) return false;
    }
  return true;
}

std::string results_csv_header() {
  return "instance,algorithm,seed,n,m,relaxed_objective,rounded_objective,"
         "iterations,time_seconds,termination_reason";
}

std::string results_csv_row(const std::string& instance_name, Index n, Index m,
                            const SolveReport& report) {
  std::ostringstream ss;
  ss << instance_name << ',' << to_string(report.algorithm) << ','
     << report.seed << ',' << n << ',' << m << ','
     << fmt_double(report.relaxed_objective) << ','
     << fmt_double(report.rounded_objective) << ',' << report.iterations << ','
     << fmt_double(report.wall_time_seconds) << ','
     << to_string(report.termination);
  return ss.str();
}

std::string trace_csv_header() {
  return "iteration,f,residual,lambda,alpha,ls_trials";
}

ObserverFn<double> make_trace_observer(std::ostream& out) {
  out << trace_csv_header() << "\n";
  return [&out](const IterationRecord<double>& rec, const Eigen::VectorXd&) {
    out << rec.iteration << ',' << fmt_double(rec.f) << ','
        << fmt_double(rec.residual) << ',' << fmt_double(rec.lambda) << ','
        << fmt_double(rec.alpha) << ',' << rec.ls_trials << "\n";
  };
}

namespace {

std::string sanitize_csv_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

int bench_thread_count(const BenchOptions& options, std::size_t tasks) {
  int threads = options.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("CPDQS_THREADS"))
      threads = std::atoi(env);
    if (threads <= 0) threads = 1;
  }
  return static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads), tasks));
}

}  // namespace

void run_bench(const std::filesystem::path& dir, const BenchOptions& options,
               std::ostream& out) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".cpdqs" || ext == ".wcsp") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  struct Task {
    std::filesystem::path file;
    Algorithm algorithm;
  };
  std::vector<Task> tasks;
  for (const auto& f : files)
    for (Algorithm a : options.algorithms) tasks.push_back({f, a});

  std::vector<std::string> rows(tasks.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& task = tasks[k];
      const std::string stem = task.file.stem().string();
      try {
        const Instance inst = load_instance(task.file);
        SolveReport rep;
        if (task.algorithm == Algorithm::Exact) {
          rep = solve_exact(inst).second;
        } else {
          rep = multistart(inst, task.algorithm, options.restarts, options.seed,
                           options.cfg, options.sigma, options.rule)
                    .second;
        }
        rows[k] = results_csv_row(inst.name(), inst.positions(),
                                  inst.dimension(), rep);
      } catch (const std::exception& e) {
        rows[k] = stem + "," + to_string(task.algorithm) + "," +
                  std::to_string(options.seed) + ",0,0,,,,," +
                  sanitize_csv_field(std::string("error: ") + e.what());
      }
    }
  };

  const int threads = bench_thread_count(options, tasks.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  out << results_csv_header() << "\n";
  for (const auto& row : rows) out << row << "\n";
}

}  // namespace cpdqs
