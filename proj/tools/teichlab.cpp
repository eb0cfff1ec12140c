// CLI entry point; subcommands are filled in as the library lands.
#include <cstdio>

int main() {
  std::puts("teichlab: subcommands not wired up yet");
  return 2;
}
