# Tests package for videolstm.
