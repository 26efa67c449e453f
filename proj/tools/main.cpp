// Command-line front end. Subcommands are registered as the library modules
// land; see cli.cpp for the implementations.
#include <cstdio>

int main() {
  std::puts("spheretile: no subcommands wired yet");
  return 2;
}
