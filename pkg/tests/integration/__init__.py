"""Client/server and full-pipeline tests."""