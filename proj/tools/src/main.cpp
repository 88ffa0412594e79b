#include <sparselogit_cli/app.hpp>

#include <iostream>

int main(int argc, char** argv) {
    return sparselogit::cli::run(argc, argv, std::cout, std::cerr);
}
