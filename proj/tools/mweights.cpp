#include "mweights/cli/app.hpp"

int main(int argc, char** argv)
{
    return mweights::cli::main(argc, argv);
}
