# annealbench shared helpers (logging, settings, run configuration)
