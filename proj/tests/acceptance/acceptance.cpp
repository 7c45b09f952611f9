// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when
// any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "../oracles.hpp"
#include "sdcancel/experiments.hpp"

namespace fs = std::filesystem;
using namespace sdcancel;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void report(const CriterionResult& c, int& failures) {
  std::cout << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.detail
            << std::endl;
  if (!c.pass) ++failures;
}

CriterionResult numerical_oracles() {
  CriterionResult c;
  c.id = 6;
  const double zoh = oracle::zoh_max_error();
  const double lifted = oracle::lifted_vs_fine_error(16, 12, 4);
  const double rot = oracle::rotation_error();
  CouplingChannel ch;
  ch.extra_paths.push_back({0.1 * ch.nominal.r, 1.1});
  const oracle::EBound eb = oracle::e_bound_check(ch, 1.0e4);
  CouplingChannel ch3;
  ch3.extra_paths = {{0.01, 1.25}, {0.004, 1.5}, {0.006, 2.0}};
  const oracle::EBound eb3 = oracle::e_bound_check(ch3, 1.0e4);
  const double pb = oracle::passband_relative_error();
  c.pass = zoh < 1e-10 && lifted < 1e-9 && rot < 1e-12 &&
           eb.peak <= eb.bound * (1 + 1e-12) && eb.mismatch < 1e-9 &&
           eb3.peak <= eb3.bound * (1 + 1e-12) && eb3.mismatch < 1e-9 && pb < 1e-2;
  std::ostringstream d;
  d << "zoh=" << zoh << " lifted_vs_fine=" << lifted << " rotation=" << rot
    << " sigma(E) peak " << eb.peak << " <= " << eb.bound << ", " << eb3.peak
    << " <= " << eb3.bound << " passband_rel_L2=" << pb;
  c.detail = d.str();
  return c;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path base = fs::temp_directory_path() / "sdcancel_acceptance";
  fs::remove_all(base);
  const fs::path run_a = base / "a", run_b = base / "b";

  int failures = 0;
  const PaperRun first = reproduce_paper(run_a.string());
  for (const CriterionResult& c : first.criteria) report(c, failures);
  report(numerical_oracles(), failures);

  reproduce_paper(run_b.string());
  CriterionResult det;
  det.id = 7;
  det.pass = true;
  std::ostringstream d;
  for (const char* name : {"fig9.csv", "fig10.csv", "fig11.csv"}) {
    const std::string a = slurp(run_a / name), b = slurp(run_b / name);
    const bool same = !a.empty() && a == b;
    det.pass = det.pass && same;
    d << name << (same ? " identical" : " DIFFERS") << " (" << a.size() << " bytes) ";
  }
  det.detail = d.str();
  report(det, failures);

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "acceptance: " << failures << " failing criteria, " << elapsed << " s"
            << std::endl;
  fs::remove_all(base);
  return failures == 0 ? 0 : 1;
}
