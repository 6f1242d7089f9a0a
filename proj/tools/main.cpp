#include "pgsv/cli.hpp"

int main(int argc, char** argv) {
    return pgsv::cli::run_main(argc, argv);
}
