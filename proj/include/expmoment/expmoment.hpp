#pragma once

#include "expmoment/numerics.hpp"
#include "expmoment/expcore.hpp"
#include "expmoment/hankel.hpp"
#include "expmoment/measures.hpp"
#include "expmoment/recover.hpp"
