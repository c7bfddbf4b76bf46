// Regenerates the shipped knowledge-base files under kb/.

#include <fstream>
#include <iostream>

#include "cabl/tasks.hpp"

int main(int argc, char** argv) {
  std::string dir = argc > 1 ? argv[1] : "kb";
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir + "/" + name);
    if (!out) {
      std::cerr << "cannot write " << dir << "/" << name << '\n';
      std::exit(1);
    }
    out << text;
    std::cout << dir << "/" << name << '\n';
  };
  write("addition_base10.pl", cabl::tasks::addition_kb_text({10, 1}));
  write("addition_base16.pl", cabl::tasks::addition_kb_text({16, 1}));
  write("chess.pl", cabl::tasks::chess_kb_text());
  return 0;
}
