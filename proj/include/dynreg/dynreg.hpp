#pragma once

#include "dynreg/error.hpp"
#include "dynreg/numerics.hpp"
#include "dynreg/tasks.hpp"
#include "dynreg/optimizer.hpp"
#include "dynreg/meta.hpp"
#include "dynreg/regret.hpp"
#include "dynreg/lemmas.hpp"
#include "dynreg/io.hpp"
#include "dynreg/experiment.hpp"
