#include <cstdio>

int main() {
    std::puts("lavgap: not yet wired");
    return 0;
}
