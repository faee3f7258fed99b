#pragma once

#include "biconnect/error.hpp"
#include "biconnect/report.hpp"
#include "biconnect/linalg.hpp"
#include "biconnect/graphs.hpp"
#include "biconnect/connection.hpp"
#include "biconnect/tensor4.hpp"
#include "biconnect/strings.hpp"
#include "biconnect/zipper.hpp"
#include "biconnect/io.hpp"
#include "biconnect/cli.hpp"
