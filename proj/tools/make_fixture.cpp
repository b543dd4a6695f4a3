// Writes the synthetic fixture corpus as JSON Lines.
#include <fstream>
#include <iostream>

#include "jeesdp/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixture OUT.jsonl\n";
    return 1;
  }
  std::ofstream out(argv[1]);
  if (!out) {
    std::cerr << "cannot write " << argv[1] << '\n';
    return 1;
  }
  jeesdp::write_corpus(out, jeesdp::synthetic_corpus());
  return 0;
}
