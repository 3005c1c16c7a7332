// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: glsemi_acceptance [--seed N] [--threads N] [criterion ...]

#include <cstdlib>
#include <iostream>
#include <string>

#include <glsemi/acceptance.hpp>

int main(int argc, char** argv) {
  glsemi::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--seed" && i + 1 < argc) {
      opt.seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (a == "--threads" && i + 1 < argc) {
      opt.threads = std::atoi(argv[++i]);
    } else if (!a.empty() && a.find_first_not_of("0123456789") == std::string::npos) {
      opt.only.push_back(std::atoi(a.c_str()));
    } else {
      std::cerr << "usage: glsemi_acceptance [--seed N] [--threads N] [criterion ...]\n";
      return 2;
    }
  }
  int failed = 0;
  const auto results = glsemi::run_acceptance<double>(opt, [&](const glsemi::CriterionResult& r) {
    std::cout << glsemi::format_result(r) << std::endl;
    failed += !r.passed;
  });
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
