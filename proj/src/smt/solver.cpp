#include "nesy/smt/solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <future>
#include <mutex>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

extern char** environ;

namespace nesy::smt {

using logic::KnowledgeBase;
using logic::Literal;
using logic::Symbol;

namespace {

bool simple_symbol_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || std::strchr("~!@$%^&*_-+=<>.?/", c) != nullptr;
}

const std::set<std::string, std::less<>>& reserved() {
  static const std::set<std::string, std::less<>> words{
      "U",    "Bool",   "Int",    "Real",   "Array", "true",  "false",  "not",          "and",
      "or",   "xor",    "ite",    "let",    "forall", "exists", "assert", "distinct",    "par",
      "_",    "!",      "as",     "match",  "BINARY", "DECIMAL", "HEXADECIMAL", "NUMERAL", "STRING"};
  return words;
}

// A legal SMT-LIB symbol for `name`: bare when possible, |quoted| otherwise,
// hex-escaped with `prefix` when even quoting cannot carry it.
std::string smt_symbol(std::string_view name, std::string_view prefix) {
  const bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0])) &&
                      std::all_of(name.begin(), name.end(), simple_symbol_char);
  if (simple && !reserved().contains(name) && name.substr(0, 2) != "p_") return std::string(name);
  if (!reserved().contains(name) && name.find_first_of("|\\") == std::string_view::npos) {
    return "|" + std::string(name) + "|";
  }
  std::string out(prefix);
  for (unsigned char c : name) out += fmt::format("{:02x}", c);
  return out;
}

std::string predicate_name(Symbol p) { return smt_symbol(p.str(), "p_"); }
std::string constant_name(Symbol c) { return smt_symbol("c_" + std::string(c.str()), "c_"); }

std::string atom(const Literal& lit, std::string_view subject) {
  std::string a = fmt::format("({} {})", predicate_name(lit.predicate), subject);
  return lit.negated ? fmt::format("(not {})", a) : a;
}

std::string ground_atom(const Literal& lit) { return atom(lit, constant_name(lit.subject.name())); }

}  // namespace

SmtProgram emit_smtlib(const KnowledgeBase& kb, Polarity polarity) {
  std::string t;
  t += "(set-logic UF)\n";
  t += "(declare-sort U 0)\n";
  for (Symbol c : kb.constants()) t += fmt::format("(declare-const {} U)\n", constant_name(c));
  for (Symbol p : kb.predicates()) t += fmt::format("(declare-fun {} (U) Bool)\n", predicate_name(p));
  for (const auto& f : kb.facts()) t += fmt::format("(assert {})\n", ground_atom(f));
  for (const auto& r : kb.rules()) {
    t += fmt::format("(assert (forall ((x U)) (=> {} {})))\n", atom(r.antecedent, "x"), atom(r.consequent, "x"));
  }
  const Literal q = polarity == Polarity::assert_query ? kb.query() : kb.query().complement();
  t += fmt::format("(assert {})\n", ground_atom(q));
  t += "(check-sat)\n";
  return {std::move(t), polarity};
}

std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::Sat: return "sat";
    case Status::Unsat: return "unsat";
    case Status::Unknown: return "unknown";
  }
  return "?";
}

std::string_view to_string(Reason r) noexcept {
  switch (r) {
    case Reason::none: return "none";
    case Reason::underdetermined: return "underdetermined";
    case Reason::contradictory_kb: return "contradictory_kb";
    case Reason::solver_unknown: return "solver_unknown";
  }
  return "?";
}

namespace {

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fd[0] >= 0) ::close(fd[0]);
    fd[0] = -1;
  }
  void close_write() {
    if (fd[1] >= 0) ::close(fd[1]);
    fd[1] = -1;
  }
};

std::optional<Status> status_line(std::string_view raw) {
  std::size_t start = 0;
  while (start < raw.size()) {
    auto nl = raw.find('\n', start);
    if (nl == std::string_view::npos) nl = raw.size();
    auto line = raw.substr(start, nl - start);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line == "sat") return Status::Sat;
    if (line == "unsat") return Status::Unsat;
    if (line == "unknown") return Status::Unknown;
    start = nl + 1;
  }
  return std::nullopt;
}

}  // namespace

SolverResult check_sat(const SmtProgram& program, const SolverConfig& config) {
  SolverResult result;
  if (config.timeout.count() <= 0) {
    result.timed_out = true;
    return result;
  }

  // A solver that exits before reading all input must not kill us.
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

  Pipe in, out;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in.fd[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out.fd[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out.fd[1], STDERR_FILENO);

  std::vector<std::string> argv_store{config.path};
  argv_store.insert(argv_store.end(), config.args.begin(), config.args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  const auto started = std::chrono::steady_clock::now();
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, config.path.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw SolverError(SolverError::Kind::missing_binary,
                      fmt::format("cannot start solver '{}': {}", config.path, std::strerror(rc)));
  }
  in.close_read();
  out.close_write();
  ::fcntl(in.fd[1], F_SETFL, O_NONBLOCK);

  const auto deadline = started + config.timeout;
  std::size_t written = 0;
  const std::string& text = program.text;
  char buf[4096];
  bool eof = false;
  while (!eof) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    pollfd fds[2] = {{out.fd[0], POLLIN, 0}, {in.fd[1], POLLOUT, 0}};
    const nfds_t n = in.fd[1] >= 0 ? 2 : 1;
    const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    if (::poll(fds, n, static_cast<int>(wait)) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (fds[1].revents & POLLOUT) {
        const ssize_t w = ::write(in.fd[1], text.data() + written, text.size() - written);
        if (w > 0) {
          written += static_cast<std::size_t>(w);
        } else if (errno != EAGAIN && errno != EINTR) {
          written = text.size();  // solver closed its input; read what it said
        }
      } else {
        written = text.size();
      }
      if (written >= text.size()) in.close_write();
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t r = ::read(out.fd[0], buf, sizeof buf);
      if (r > 0) {
        result.raw_output.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EINTR) {
        eof = true;
      }
    }
  }
  in.close_write();

  int status = 0;
  if (result.timed_out) ::kill(pid, SIGKILL);
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.wall_time =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - started);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);

  if (auto s = status_line(result.raw_output)) {
    result.status = *s;
  } else if (!result.timed_out) {
    if (result.exit_code == 127) {
      throw SolverError(SolverError::Kind::missing_binary, fmt::format("cannot start solver '{}'", config.path));
    }
    throw SolverError(SolverError::Kind::unparseable_output,
                      fmt::format("solver exited with {} and no status: {}", result.exit_code, result.raw_output));
  }
  return result;
}

Adjudication adjudicate(const SolverResult& pos, const SolverResult& neg) {
  using logic::Verdict;
  if (pos.status == Status::Unknown || neg.status == Status::Unknown) {
    return {Verdict::Inconsistent, Reason::solver_unknown};
  }
  if (pos.status == Status::Sat && neg.status == Status::Unsat) return {Verdict::True, Reason::none};
  if (pos.status == Status::Unsat && neg.status == Status::Sat) return {Verdict::False, Reason::none};
  if (pos.status == Status::Sat) return {Verdict::Inconsistent, Reason::underdetermined};
  return {Verdict::Inconsistent, Reason::contradictory_kb};
}

Decision decide_with_solver(const KnowledgeBase& kb, const SolverConfig& config, SolverGate* gate, bool concurrent) {
  Decision d;
  d.pos_program = emit_smtlib(kb, Polarity::assert_query);
  d.neg_program = emit_smtlib(kb, Polarity::assert_negated_query);
  auto run = [&](const SmtProgram& p) {
    if (gate) gate->acquire();
    struct Release {
      SolverGate* g;
      ~Release() {
        if (g) g->release();
      }
    } release{gate};
    return check_sat(p, config);
  };
  if (concurrent) {
    auto pos = std::async(std::launch::async, run, std::cref(d.pos_program));
    d.neg = run(d.neg_program);
    d.pos = pos.get();
  } else {
    d.pos = run(d.pos_program);
    d.neg = run(d.neg_program);
  }
  d.adjudication = adjudicate(d.pos, d.neg);
  return d;
}

}  // namespace nesy::smt
