for element in l:
    if element > 0:
        c+=1
    else:
        selected = element
        break
