// SPDX-License-Identifier: MIT
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cellcount/oracle.hpp"

namespace cellcount {

std::optional<SolverCommand> parse_solver_spec(const std::string& spec) {
  std::string s = spec;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  if (s.empty() || s == "builtin") return std::nullopt;
  SolverCommand cmd;
  if (s.rfind("xor:", 0) == 0) {
    cmd.native_xor = true;
    s = s.substr(4);
  }
  cmd.command_template = s;
  return cmd;
}

namespace {

struct ProcessResult {
  int exit_status = 0;
  std::string output;
};

std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q += c;
    }
  }
  return q + "'";
}

ProcessResult run_with_timeout(const std::string& command, double timeout_seconds) {
  int fds[2];
  if (pipe(fds) != 0) throw OracleError("cannot create pipe for external solver");
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw OracleError("cannot fork external solver");
  }
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    const int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  ProcessResult res;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  char buf[4096];
  bool timed_out = false;
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    const int pr = poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (pr < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (pr == 0) continue;
    const ssize_t got = read(fds[0], buf, sizeof buf);
    if (got <= 0) break;
    res.output.append(buf, static_cast<std::size_t>(got));
  }
  close(fds[0]);
  if (timed_out) kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  if (timed_out) throw OracleError("external solver timed out");
  res.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

class TempFile {
 public:
  TempFile() {
    const char* dir = std::getenv("TMPDIR");
    std::string pattern = std::string(dir ? dir : "/tmp") + "/cellcount-XXXXXX.cnf";
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    const int fd = mkstemps(buf.data(), 4);
    if (fd < 0) throw OracleError("cannot create temporary DIMACS file");
    close(fd);
    path_ = buf.data();
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

SolutionSet external_bounded_sat(const OracleQuery& q, const SolverCommand& cmd, OracleStats* stats) {
  if (q.formula == nullptr || q.limit < 1) throw std::invalid_argument("malformed oracle query");
  if (is_dnf(*q.formula)) return dnf_bounded_sat(q, stats);
  if (stats) ++stats->queries;
  const auto& f = std::get<CnfFormula>(*q.formula);
  SolutionSet out;
  std::vector<XorClause> xors = f.xors;
  xors.insert(xors.end(), q.extra_xors.begin(), q.extra_xors.end());

  std::vector<Clause> clauses = f.clauses;
  Var next_fresh = f.num_vars + 1;
  std::vector<XorClause> native;
  for (const auto& x : xors) {
    if (x.is_tautology()) continue;
    if (cmd.native_xor && !x.is_contradiction()) {
      native.push_back(x);
    } else {
      auto cs = blast_xor_to_cnf(x, next_fresh);
      clauses.insert(clauses.end(), cs.begin(), cs.end());
    }
  }
  const std::uint32_t total_vars = next_fresh - 1;

  TempFile tmp;
  std::string command = cmd.command_template;
  const auto at = command.find("{input}");
  if (at == std::string::npos) {
    command += " " + shell_quote(tmp.path());
  } else {
    command.replace(at, 7, shell_quote(tmp.path()));
  }

  while (true) {
    {
      std::ofstream os(tmp.path(), std::ios::trunc);
      os << "p cnf " << total_vars << ' ' << clauses.size() + native.size() << '\n';
      for (const auto& c : clauses) {
        for (Lit l : c) os << l.to_dimacs() << ' ';
        os << "0\n";
      }
      for (const auto& x : native) {
        os << 'x';
        for (std::size_t i = 0; i < x.vars.size(); ++i) os << ' ' << ((i == 0 && !x.parity) ? "-" : "") << x.vars[i];
        os << " 0\n";
      }
      if (!os) throw OracleError("cannot write temporary DIMACS file");
    }
    if (stats) {
      ++stats->solver_invocations;
      ++stats->sat_calls;
    }
    const ProcessResult pr = run_with_timeout(command, cmd.timeout_seconds);

    bool sat = false, unsat = false;
    Assignment a(static_cast<std::size_t>(f.num_vars) + 1);
    std::istringstream is(pr.output);
    std::string line;
    while (std::getline(is, line)) {
      if (line.rfind("s ", 0) == 0) {
        if (line.find("UNSATISFIABLE") != std::string::npos) {
          unsat = true;
        } else if (line.find("SATISFIABLE") != std::string::npos) {
          sat = true;
        }
      } else if (line.rfind(cmd.model_prefix, 0) == 0) {
        std::istringstream ls(line.substr(cmd.model_prefix.size()));
        std::string tok;
        while (ls >> tok) {
          char* end = nullptr;
          const long long v = std::strtoll(tok.c_str(), &end, 10);
          if (end == tok.c_str() || *end != '\0') throw OracleError("unparsable model token '" + tok + "'");
          if (v == 0) break;
          const long long av = v < 0 ? -v : v;
          if (av <= static_cast<long long>(f.num_vars)) a.set(static_cast<std::size_t>(av), v > 0);
        }
      }
    }
    if (unsat) break;
    if (!sat) {
      throw OracleError("external solver exited with status " + std::to_string(pr.exit_status) +
                        " without a recognizable result line");
    }
    if (!satisfies(f, a) || !satisfies_all(q.extra_xors, a)) throw OracleError("external solver returned a non-model");
    Solution s;
    s.projection = project(a, q.sampling);
    s.model = a;
    s.weight = q.weights ? assignment_weight(*q.weights, a) : Rational(1);
    out.add(std::move(s));
    if (q.stop && q.stop(out.solutions.back())) {
      out.stopped = true;
      break;
    }
    if (out.size() >= q.limit) break;
    if (q.sampling.empty()) break;
    clauses.push_back(blocking_clause(q.sampling, out.solutions.back().projection));
  }
  return out;
}

SolutionSet ExternalOracle::bounded_sat(const OracleQuery& q) { return external_bounded_sat(q, cmd_, &stats_); }

}  // namespace cellcount
