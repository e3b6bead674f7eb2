from gnss_sentinel._memtune import tune_allocator

tune_allocator()
