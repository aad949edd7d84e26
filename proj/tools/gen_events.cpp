// Regenerates the bundled event CSVs from the synthetic hydrograph
// definitions.  Run after changing src/events.cpp so the data files and
// the library stay in lockstep (a test compares them byte-for-byte).
#include <filesystem>
#include <iostream>

#include "pdmpc/events.hpp"
#include "pdmpc/io.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? argv[1] : "data/events";
  fs::create_directories(dir);
  for (const auto& event : pdmpc::events::bundled()) {
    const fs::path path = dir / (event.name + ".csv");
    pdmpc::io::save_event(event, path.string());
    std::cout << "wrote " << path.string() << " (" << event.inflow.size()
              << " rows)\n";
  }
  return 0;
}
