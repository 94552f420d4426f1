//! C interface to the wrfq toolkit. Under construction.
