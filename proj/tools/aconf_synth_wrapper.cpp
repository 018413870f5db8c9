// Wrapper executable for synthetic surfaces, speaking the standard call
// convention: <instance> <surface.json> <cutoff> <runlength> <seed> -name value ...
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "aconf/error.hpp"
#include "aconf/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 6) {
    std::cerr << "usage: " << argv[0] << " <instance> <surface.json> <cutoff> <runlength> <seed> [-name value]...\n";
    return 1;
  }
  try {
    std::string instance = argv[1];
    auto surface = aconf::load_surface(argv[2]);
    double cutoff = std::stod(argv[3]);
    std::uint64_t seed = std::stoull(argv[5]);
    aconf::NamedValues values;
    for (int i = 6; i + 1 < argc; i += 2) {
      std::string name = argv[i];
      if (name.empty() || name[0] != '-') throw aconf::Error("bad parameter flag '" + name + "'");
      values[name.substr(1)] = argv[i + 1];
    }
    auto out = aconf::eval_surface(surface, values, instance, seed, cutoff, cutoff);
    if (surface.sleep) std::this_thread::sleep_for(std::chrono::duration<double>(out.runtime));
    std::printf("Result for configurator: %s, %.17g, 0, 0, %llu\n", aconf::to_string(out.status).c_str(), out.runtime,
                static_cast<unsigned long long>(seed));
  } catch (const std::exception& e) {
    std::cerr << "wrapper: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
