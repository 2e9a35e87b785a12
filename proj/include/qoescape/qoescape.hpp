#ifndef QOESCAPE_QOESCAPE_HPP
#define QOESCAPE_QOESCAPE_HPP

#include "asymptotics.hpp"
#include "errors.hpp"
#include "histogram.hpp"
#include "landscape.hpp"
#include "qoe.hpp"
#include "random.hpp"
#include "report.hpp"
#include "sensitivity.hpp"
#include "topology.hpp"
#include "validation.hpp"

#endif  // QOESCAPE_QOESCAPE_HPP
