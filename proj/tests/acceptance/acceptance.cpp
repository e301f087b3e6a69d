#include <cstdlib>
#include <iostream>
#include <string>

#include "qhit_app/accept.hpp"

int main(int argc, char** argv) {
  qhit::app::AcceptOptions options;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i], value = argv[i + 1];
    if (key == "--scratch")
      options.scratch = value;
    else if (key == "--seed")
      options.seed = std::stoull(value);
    else if (key == "--threads")
      options.threads = std::stoul(value);
    else {
      std::cerr << "unknown option " << key << "\n";
      return 2;
    }
  }
  try {
    const auto results = qhit::app::run_acceptance(options, &std::cerr);
    std::cout << qhit::app::render_acceptance(results) << std::flush;
    for (const auto& r : results)
      if (!r.pass) return 1;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
